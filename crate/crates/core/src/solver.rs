//! Time stepping for the coupled system.
//!
//! One iteration, in order:
//! 1. `a^n = a(u^n, v^n)`
//! 2. `v^{n+1} = v^n + τ div(a^n ∇v^n)` (explicit)
//! 3. fractional gradient of `u^n`, then `c^n = c(|∇^α u^n|, v^{n+1})`
//! 4. `d^n = u^n + τ div(c^n ∇u^n) + τλ K'f`
//! 5. `u^{n+1} = F⁻¹[ d̂^n / (1 + τλ |K̂|²) ]` (fidelity term implicit)
//!
//! Fields are never clamped while iterating.

use std::fmt;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diffusion::{coeff_a, coeff_c, ModelParams};
use crate::error::{invalid, Error, Result};
use crate::grid::{flux_divergence, GridGeometry, ImageField};
use crate::kernels::{adjoint_convolve, convolve, kernel_spectrum, Kernel, KernelSpectrum};
use crate::spectral::{dft2, idft2};

/// Bound on `τ·max(coefficient)/h²` for the semi-implicit `u` and explicit `v` schemes.
pub const DIFFUSION_CFL_BOUND: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopRule {
    /// Stop once `‖u^{n+1} - u^n‖² / ‖u^{n+1}‖² ≤ tol`.
    #[default]
    SuccessiveChange,
    /// Stop once `‖u^{n+1} - f‖² / ‖u^{n+1}‖² ≤ tol`.
    DistanceToF,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Converged,
    MaxIterations,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Converged => "converged",
            StopReason::MaxIterations => "max-iterations",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub params: ModelParams,
    pub geometry: GridGeometry,
    pub tol: f64,
    pub max_iter: usize,
    pub stop_rule: StopRule,
    /// Abort on a stability-bound violation instead of warning.
    pub enforce_cfl: bool,
    /// Replace `c^n` by a constant (frozen-coefficient experiments).
    pub c_override: Option<f64>,
    /// Replace `a^n` by a constant.
    pub a_override: Option<f64>,
    /// Fail the run if `‖u^n‖∞` exceeds its exponential growth bound.
    pub monitor_growth: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            geometry: GridGeometry::default(),
            tol: 0.005,
            max_iter: 500,
            stop_rule: StopRule::SuccessiveChange,
            enforce_cfl: true,
            c_override: None,
            a_override: None,
            monitor_growth: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.geometry.validate()?;
        if !(self.tol > 0.0) {
            return Err(invalid("tol", format!("must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        for (name, value) in [("c_override", self.c_override), ("a_override", self.a_override)] {
            if let Some(x) = value {
                if !(x >= 0.0 && x.is_finite()) {
                    return Err(invalid(name, format!("must be non-negative, got {x}")));
                }
            }
        }
        Ok(())
    }
}

/// Per-iteration scalars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub n: usize,
    pub rel_change: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub c_max: f64,
    pub a_max: f64,
    pub energy: f64,
}

impl TraceRecord {
    pub const CSV_HEADER: &'static str = "n,rel_change,u_min,u_max,v_min,v_max,c_max,a_max,energy";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.n,
            self.rel_change,
            self.u_min,
            self.u_max,
            self.v_min,
            self.v_max,
            self.c_max,
            self.a_max,
            self.energy
        )
    }
}

/// Writes a trace as CSV text, header included.
pub fn trace_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::from(TraceRecord::CSV_HEADER);
    out.push('\n');
    for r in trace {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Iteration state of one restoration run.
#[derive(Debug, Clone)]
pub struct RestorationState {
    pub u: ImageField,
    pub v: ImageField,
    pub n: usize,
    f: ImageField,
    gray_max: f64,
    ks: KernelSpectrum,
    kernel_power: Vec<f64>,
    fidelity_rhs: ImageField,
    growth_reference: f64,
    pub trace: Vec<TraceRecord>,
    pub cfl_warnings: usize,
}

impl RestorationState {
    /// Initial state `u⁰ = v⁰ = f` with `M = max f`.
    pub fn new(f: &ImageField, kernel: &Kernel) -> Result<Self> {
        f.ensure_finite()?;
        let gray_max = f.max();
        if !(gray_max > 0.0) {
            return Err(invalid(
                "f",
                format!("maximum gray level must be positive, got {gray_max}"),
            ));
        }
        Self::from_parts(f.clone(), f.clone(), f.clone(), gray_max, kernel)
    }

    /// State with arbitrary iterates, for experiments on single steps.
    pub fn from_parts(f: ImageField, u: ImageField, v: ImageField, gray_max: f64, kernel: &Kernel) -> Result<Self> {
        f.ensure_same_dims(&u)?;
        f.ensure_same_dims(&v)?;
        if !(gray_max > 0.0 && gray_max.is_finite()) {
            return Err(invalid("M", format!("must be positive, got {gray_max}")));
        }
        let ks = kernel_spectrum(kernel, f.width(), f.height())?;
        let kernel_power = ks.power();
        let fidelity_rhs = adjoint_convolve(&f, &ks)?;
        let growth_reference = f.max_abs() + fidelity_rhs.max_abs();
        Ok(Self {
            u,
            v,
            n: 0,
            f,
            gray_max,
            ks,
            kernel_power,
            fidelity_rhs,
            growth_reference,
            trace: Vec::new(),
            cfl_warnings: 0,
        })
    }

    pub fn f(&self) -> &ImageField {
        &self.f
    }

    pub fn gray_max(&self) -> f64 {
        self.gray_max
    }

    pub fn kernel_spectrum(&self) -> &KernelSpectrum {
        &self.ks
    }

    /// `K' * f`.
    pub fn fidelity_rhs(&self) -> &ImageField {
        &self.fidelity_rhs
    }

    /// Discrete energy `½ Σ (u² + v²) h²`.
    pub fn energy(&self, h: f64) -> f64 {
        discrete_energy(&self.u, &self.v, h)
    }

    /// `e^{2λ n τ} (‖f‖∞ + ‖K'f‖∞)`.
    pub fn growth_bound(&self, n: usize, lambda: f64, tau: f64) -> f64 {
        (2.0 * lambda * n as f64 * tau).exp() * self.growth_reference
    }
}

pub fn discrete_energy(u: &ImageField, v: &ImageField, h: f64) -> f64 {
    0.5 * (u.norm_sq() + v.norm_sq()) * h * h
}

fn ensure_finite(field: &ImageField, stage: &'static str, iteration: usize) -> Result<()> {
    if field.is_finite() {
        Ok(())
    } else {
        Err(Error::NumericalAbort { stage, iteration })
    }
}

fn constant_like(field: &ImageField, value: f64) -> ImageField {
    field.map(|_| value)
}

fn coefficient_a(state: &RestorationState, config: &SolverConfig) -> Result<ImageField> {
    match config.a_override {
        Some(a) => Ok(constant_like(&state.u, a)),
        None => coeff_a(&state.u, &state.v, &config.params, state.gray_max),
    }
}

fn coefficient_c(state: &RestorationState, v_next: &ImageField, config: &SolverConfig) -> Result<ImageField> {
    match config.c_override {
        Some(c) => Ok(constant_like(&state.u, c)),
        None => coeff_c(&state.u, v_next, &config.params, state.gray_max, config.geometry.h),
    }
}

fn explicit_diffusion(field: &ImageField, coef: &ImageField, tau: f64, h: f64) -> Result<ImageField> {
    let div = flux_divergence(coef, field, h)?;
    field.zip_map(&div, |x, d| x + tau * d)
}

fn v_update(state: &RestorationState, a: &ImageField, config: &SolverConfig) -> Result<ImageField> {
    let next = explicit_diffusion(&state.v, a, config.geometry.tau, config.geometry.h)?;
    ensure_finite(&next, "v update", state.n)?;
    Ok(next)
}

fn u_update(state: &RestorationState, c: &ImageField, config: &SolverConfig) -> Result<ImageField> {
    let GridGeometry { tau, h } = config.geometry;
    let lambda = config.params.lambda;
    let diffused = explicit_diffusion(&state.u, c, tau, h)?;
    let d = diffused.zip_map(&state.fidelity_rhs, |x, g| x + tau * lambda * g)?;
    ensure_finite(&d, "u right-hand side", state.n)?;
    let mut spec = dft2(&d);
    for (z, p) in spec.coeffs_mut().iter_mut().zip(&state.kernel_power) {
        *z /= 1.0 + tau * lambda * p;
    }
    let next = idft2(&spec).real_part();
    ensure_finite(&next, "u update", state.n)?;
    Ok(next)
}

/// `v^{n+1}` from the explicit scheme with `a^n = a(u^n, v^n)`.
pub fn v_step(state: &RestorationState, config: &SolverConfig) -> Result<ImageField> {
    let a = coefficient_a(state, config)?;
    v_update(state, &a, config)
}

/// `u^{n+1}` from the semi-implicit scheme; `v_next` is `v^{n+1}`.
pub fn u_step(state: &RestorationState, v_next: &ImageField, config: &SolverConfig) -> Result<ImageField> {
    let c = coefficient_c(state, v_next, config)?;
    u_update(state, &c, config)
}

/// `u^{n+1}` with the fidelity term `-τλ K'(K u^n - f)` treated explicitly.
pub fn u_step_explicit(state: &RestorationState, v_next: &ImageField, config: &SolverConfig) -> Result<ImageField> {
    let GridGeometry { tau, h } = config.geometry;
    let lambda = config.params.lambda;
    let c = coefficient_c(state, v_next, config)?;
    let diffused = explicit_diffusion(&state.u, &c, tau, h)?;
    let blurred = convolve(&state.u, &state.ks)?;
    let residual = blurred.zip_map(&state.f, |ku, f| ku - f)?;
    let back = adjoint_convolve(&residual, &state.ks)?;
    let next = diffused.zip_map(&back, |x, r| x - tau * lambda * r)?;
    ensure_finite(&next, "explicit u update", state.n)?;
    Ok(next)
}

/// Result of a stability-bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CflReport {
    pub bound: f64,
    pub lhs: f64,
    pub ok: bool,
}

impl CflReport {
    fn new(lhs: f64, bound: f64) -> Self {
        Self {
            bound,
            lhs,
            ok: lhs <= bound,
        }
    }
}

/// `τ · max c / h² ≤ 1/4` for the semi-implicit `u` scheme.
pub fn cfl_bound_u(cmax: f64, geometry: &GridGeometry) -> CflReport {
    CflReport::new(geometry.tau * cmax / (geometry.h * geometry.h), DIFFUSION_CFL_BOUND)
}

/// `τ · max a / h² ≤ 1/4` for the explicit `v` scheme.
pub fn cfl_bound_v(amax: f64, geometry: &GridGeometry) -> CflReport {
    CflReport::new(geometry.tau * amax / (geometry.h * geometry.h), DIFFUSION_CFL_BOUND)
}

/// `τ · max c ≤ 2 / (λ + 8/h²)` for the fully explicit `u` scheme.
pub fn cfl_bound_u_explicit(cmax: f64, geometry: &GridGeometry, lambda: f64) -> CflReport {
    CflReport::new(geometry.tau * cmax, 2.0 / (lambda + 8.0 / (geometry.h * geometry.h)))
}

/// Von Neumann amplification factor of the frozen-coefficient
/// semi-implicit scheme at angular frequencies `(w1, w2)`.
pub fn amplification_factor(w1: f64, w2: f64, c: f64, geometry: &GridGeometry, lambda: f64, khat: Complex64) -> f64 {
    let GridGeometry { tau, h } = *geometry;
    let s = (w1 * h / 2.0).sin().powi(2) + (w2 * h / 2.0).sin().powi(2);
    (1.0 - 4.0 * c * tau / (h * h) * s) / (1.0 + tau * lambda * khat.norm_sqr())
}

/// What happened in one call to [`step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub record: TraceRecord,
    /// Value tested by the configured stop rule.
    pub stop_metric: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn check_cfl(
    report: CflReport,
    scheme: &'static str,
    state: &mut RestorationState,
    config: &SolverConfig,
) -> Result<()> {
    if report.ok {
        return Ok(());
    }
    if config.enforce_cfl {
        return Err(Error::CflViolation {
            scheme,
            iteration: state.n,
            lhs: report.lhs,
            bound: report.bound,
        });
    }
    if state.cfl_warnings == 0 {
        warn!(
            "{scheme} scheme exceeds its stability bound at iteration {}: {:.4} > {:.4}",
            state.n, report.lhs, report.bound
        );
    }
    state.cfl_warnings += 1;
    Ok(())
}

/// Advances the state by one full iteration and appends a trace record.
pub fn step(state: &mut RestorationState, config: &SolverConfig) -> Result<StepOutcome> {
    let geometry = config.geometry;
    let a = coefficient_a(state, config)?;
    let a_max = a.max();
    check_cfl(cfl_bound_v(a_max, &geometry), "v", state, config)?;
    let v_next = v_update(state, &a, config)?;

    let c = coefficient_c(state, &v_next, config)?;
    ensure_finite(&c, "coefficient c", state.n)?;
    let c_max = c.max();
    check_cfl(cfl_bound_u(c_max, &geometry), "u", state, config)?;
    let u_next = u_update(state, &c, config)?;

    let u_norm = u_next.norm_sq();
    let change = u_next.zip_map(&state.u, |a, b| a - b)?.norm_sq();
    let rel_change = ratio(change, u_norm);
    let stop_metric = match config.stop_rule {
        StopRule::SuccessiveChange => rel_change,
        StopRule::DistanceToF => ratio(u_next.zip_map(&state.f, |a, b| a - b)?.norm_sq(), u_norm),
    };

    state.u = u_next;
    state.v = v_next;
    state.n += 1;

    if config.monitor_growth {
        let bound = state.growth_bound(state.n, config.params.lambda, geometry.tau);
        let norm = state.u.max_abs();
        if norm > bound {
            return Err(Error::GrowthBoundViolated {
                iteration: state.n,
                norm,
                bound,
            });
        }
    }

    let record = TraceRecord {
        n: state.n,
        rel_change,
        u_min: state.u.min(),
        u_max: state.u.max(),
        v_min: state.v.min(),
        v_max: state.v.max(),
        c_max,
        a_max,
        energy: state.energy(geometry.h),
    };
    state.trace.push(record);
    Ok(StepOutcome { record, stop_metric })
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub restored: ImageField,
    pub state: RestorationState,
    pub stop_reason: StopReason,
}

/// Runs the restoration loop from `u⁰ = v⁰ = f` until the stop rule fires
/// or `max_iter` iterations have been taken.
pub fn run(f: &ImageField, kernel: &Kernel, config: &SolverConfig) -> Result<RunOutcome> {
    config.validate()?;
    if f.data().iter().any(|&x| x <= 0.0) {
        warn!("observed image has non-positive gray levels; the model assumes f > 0");
    }
    let mut state = RestorationState::new(f, kernel)?;
    let stop_reason = loop {
        let outcome = step(&mut state, config)?;
        if outcome.stop_metric <= config.tol {
            break StopReason::Converged;
        }
        if state.n >= config.max_iter {
            break StopReason::MaxIterations;
        }
    };
    Ok(RunOutcome {
        restored: state.u.clone(),
        state,
        stop_reason,
    })
}
