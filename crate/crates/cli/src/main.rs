use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rdrestore_cli::commands;
use rdrestore_cli::{CliError, RunConfig};
use rdrestore_core::Axis;
use serde::Serialize;

/// Texture-preserving image restoration with a fractional-order
/// reaction-diffusion system.
#[derive(Parser)]
#[command(name = "rdrestore", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON run configuration; built-in defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration field, e.g. `--set model.lambda=15`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        base.with_overrides(&self.overrides)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    X,
    Y,
}

#[derive(Subcommand)]
enum Command {
    /// Blur and add Gaussian noise to `io.input`, writing `io.output`.
    Degrade(ConfigArgs),
    /// Restore `io.input` into `io.output`.
    Restore(ConfigArgs),
    /// Print PSNR and SSIM of an image against a reference.
    Evaluate { image: PathBuf, reference: PathBuf },
    /// Print step-size bounds for the configured grid and parameters.
    Stability(ConfigArgs),
    /// Print the one-axis fractional difference multiplier as CSV.
    MultiplierDump {
        #[arg(long, default_value_t = 0.9)]
        alpha: f64,
        #[arg(long, default_value_t = 64)]
        size: usize,
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        #[arg(long, value_enum, default_value = "x")]
        axis: AxisArg,
    },
    /// Print the configured kernel's taps as CSV.
    KernelDump(ConfigArgs),
    /// Write the built-in synthetic test image.
    Synth {
        #[arg(long, default_value_t = 64)]
        size: usize,
        output: PathBuf,
    },
}

// A closed pipe (e.g. `| head`) is not an error worth reporting.
fn emit(text: &str) {
    let _ = io::stdout().lock().write_all(text.as_bytes());
}

fn print_json<T: Serialize>(value: &T) {
    emit(&(serde_json::to_string_pretty(value).expect("serializable") + "\n"));
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Degrade(args) => print_json(&commands::cmd_degrade(&args.resolve()?)?),
        Command::Restore(args) => print_json(&commands::cmd_restore(&args.resolve()?)?),
        Command::Evaluate { image, reference } => print_json(&commands::cmd_evaluate(&image, &reference)?),
        Command::Stability(args) => print_json(&commands::cmd_stability(&args.resolve()?)?),
        Command::MultiplierDump { alpha, size, h, axis } => {
            let axis = match axis {
                AxisArg::X => Axis::X,
                AxisArg::Y => Axis::Y,
            };
            emit(&commands::multiplier_dump(alpha, size, h, axis)?);
        }
        Command::KernelDump(args) => emit(&commands::kernel_dump(&args.resolve()?.kernel)?),
        Command::Synth { size, output } => commands::synth(size, Path::new(&output))?,
    }
    Ok(())
}

/// Worker threads for the transforms; unset means one per core.
const THREADS_VAR: &str = "RDRESTORE_THREADS";

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{THREADS_VAR}={raw} is not a thread count")))?;
    Ok(rdrestore_core::init_thread_pool(threads)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match init_threads().and_then(|()| execute(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
