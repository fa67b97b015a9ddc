//! Subcommand implementations. Each returns `Ok` on success; the binary maps
//! errors to exit codes through [`CliError::exit_code`].

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rdrestore_core::degrade::degrade;
use rdrestore_core::metrics::quality_report;
use rdrestore_core::pgm::{load_image, quantize, save_image, PgmFormat};
use rdrestore_core::solver::{cfl_bound_u, cfl_bound_u_explicit, cfl_bound_v, run, trace_csv};
use rdrestore_core::spectral::{frac_multiplier, frequency};
use rdrestore_core::{Axis, CflReport, GridGeometry, ImageField, KernelSpec, NoiseSpec, QualityReport, StopReason};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

fn required<'a>(path: &'a Option<PathBuf>, name: &str) -> Result<&'a Path, CliError> {
    path.as_deref()
        .ok_or_else(|| CliError::Config(format!("io.{name} must be set")))
}

fn sidecar_path(config: &RunConfig, output: &Path) -> PathBuf {
    config.io.summary.clone().unwrap_or_else(|| {
        let mut name = output.as_os_str().to_owned();
        name.push(".json");
        PathBuf::from(name)
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// What an image looks like once written to an 8-bit file.
pub fn quantized(field: &ImageField) -> ImageField {
    field.map(|x| quantize(x) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegradeSidecar {
    pub kernel: KernelSpec,
    pub noise: NoiseSpec,
    /// Quality of the written (quantized) degraded image against the clean input.
    pub degraded: QualityReport,
}

/// Loads `io.input`, blurs and adds noise, writes `io.output` and a JSON sidecar.
pub fn cmd_degrade(config: &RunConfig) -> Result<DegradeSidecar, CliError> {
    let input = required(&config.io.input, "input")?;
    let output = required(&config.io.output, "output")?;
    let clean = load_image(input)?;
    let kernel = config.kernel.build()?;
    let degraded = quantized(&degrade(&clean, &kernel, &config.noise)?);
    save_image(&degraded, output, PgmFormat::Binary)?;
    let sidecar = DegradeSidecar {
        kernel: config.kernel,
        noise: config.noise,
        degraded: quality_report(&degraded, &clean)?,
    };
    write_text(&sidecar_path(config, output), &to_json(&sidecar))?;
    Ok(sidecar)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestoreSummary {
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub final_rel_change: f64,
    pub cfl_warnings: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_quality: Option<QualityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restored_quality: Option<QualityReport>,
}

/// Runs the solver on `io.input`; writes the restored image, the trace CSV
/// (when `io.trace` is set) and a JSON summary.
pub fn cmd_restore(config: &RunConfig) -> Result<RestoreSummary, CliError> {
    let input = required(&config.io.input, "input")?;
    let output = required(&config.io.output, "output")?;
    let solver = config.solver_config()?;
    let kernel = config.kernel.build()?;
    let f = load_image(input)?;
    let reference = config.io.reference.as_deref().map(load_image).transpose()?;

    let outcome = run(&f, &kernel, &solver)?;
    let restored = quantized(&outcome.restored);
    save_image(&restored, output, PgmFormat::Binary)?;
    if let Some(trace) = &config.io.trace {
        write_text(trace, &trace_csv(&outcome.state.trace))?;
    }
    let (input_quality, restored_quality) = match &reference {
        Some(r) => (Some(quality_report(&f, r)?), Some(quality_report(&restored, r)?)),
        None => (None, None),
    };
    let summary = RestoreSummary {
        iterations: outcome.state.n,
        stop_reason: outcome.stop_reason,
        final_rel_change: outcome.state.trace.last().map_or(0.0, |r| r.rel_change),
        cfl_warnings: outcome.state.cfl_warnings,
        input_quality,
        restored_quality,
    };
    write_text(&sidecar_path(config, output), &to_json(&summary))?;
    Ok(summary)
}

/// PSNR/SSIM of two image files.
pub fn cmd_evaluate(a: &Path, b: &Path) -> Result<QualityReport, CliError> {
    let u = load_image(a)?;
    let f = load_image(b)?;
    Ok(quality_report(&u, &f)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeStability {
    pub scheme: &'static str,
    pub quantity: &'static str,
    #[serde(flatten)]
    pub report: CflReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub advisory: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub tau: f64,
    pub h: f64,
    pub lambda: f64,
    pub c_max: f64,
    pub a_max: f64,
    pub schemes: Vec<SchemeStability>,
}

/// Evaluates the three step-size bounds against the worst-case coefficients
/// `c = a = 1`.
pub fn cmd_stability(config: &RunConfig) -> Result<StabilityReport, CliError> {
    let geometry = GridGeometry {
        h: config.solver.h,
        tau: config.solver.tau,
    };
    geometry.validate()?;
    let (c_max, a_max) = (1.0, 1.0);
    let lambda = config.model.lambda;
    let u = cfl_bound_u(c_max, &geometry);
    let schemes = vec![
        SchemeStability {
            scheme: "semi-implicit-u",
            quantity: "tau*max(c)/h^2",
            report: u,
            advisory: (!u.ok)
                .then_some("exceeds the strict l2 bound; the scheme is known to still behave well slightly beyond it"),
        },
        SchemeStability {
            scheme: "explicit-v",
            quantity: "tau*max(a)/h^2",
            report: cfl_bound_v(a_max, &geometry),
            advisory: None,
        },
        SchemeStability {
            scheme: "explicit-u",
            quantity: "tau*max(c)",
            report: cfl_bound_u_explicit(c_max, &geometry, lambda),
            advisory: None,
        },
    ];
    Ok(StabilityReport {
        tau: geometry.tau,
        h: geometry.h,
        lambda,
        c_max,
        a_max,
        schemes,
    })
}

/// CSV table `index,omega,real,imag` of the fractional multiplier along one axis.
pub fn multiplier_dump(alpha: f64, size: usize, h: f64, axis: Axis) -> Result<String, CliError> {
    let m = frac_multiplier(alpha, axis, size, size, h)?;
    let mut out = String::from("index,omega,real,imag\n");
    for (k, z) in m.axis_table() {
        writeln!(out, "{},{:e},{:e},{:e}", k, frequency(k, size), z.re, z.im).expect("string write");
    }
    Ok(out)
}

/// CSV table `dx,dy,weight` of the configured kernel's taps.
pub fn kernel_dump(spec: &KernelSpec) -> Result<String, CliError> {
    let kernel = spec.build()?;
    let mut out = String::from("dx,dy,weight\n");
    for (dx, dy, w) in kernel.offsets() {
        writeln!(out, "{dx},{dy},{w:e}").expect("string write");
    }
    Ok(out)
}

/// Writes the deterministic synthetic texture image.
pub fn synth(size: usize, output: &Path) -> Result<(), CliError> {
    let field = rdrestore_core::synthetic::texture(size)?;
    save_image(&quantized(&field), output, PgmFormat::Binary)?;
    Ok(())
}
