//! Image restoration with a coupled nonlinear nonlocal reaction-diffusion
//! system.
//!
//! The restored image `u` diffuses with a coefficient that combines a
//! gray-level indicator driven by a smoothed companion image `v` and a
//! texture detector built from a fractional-order gradient; a fidelity term
//! `λ K'(K u - f)` pulls `u` towards the blurred observation. The solver
//! advances `v` explicitly and `u` semi-implicitly, inverting the fidelity
//! operator in the Fourier domain on a periodic grid.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod degrade;
pub mod diffusion;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod metrics;
pub mod pgm;
pub mod solver;
pub mod spectral;
pub mod synthetic;

pub use degrade::NoiseSpec;
pub use diffusion::{coeff_a, coeff_c, gray_indicator, texture_detector, ModelParams, TextureForm};
pub use error::{Error, Result};
pub use grid::{Axis, FieldStats, GridGeometry, ImageField};
pub use kernels::{Kernel, KernelSpec, KernelSpectrum};
pub use metrics::{psnr, ssim, QualityReport};
pub use solver::{CflReport, RestorationState, RunOutcome, SolverConfig, StopReason, StopRule, TraceRecord};
pub use spectral::{ComplexField, FracMultiplier, FracOutput, Spectrum};

/// Fixes the number of worker threads used inside the transforms. Call once,
/// before any other work; results are bitwise identical for every setting.
pub fn init_thread_pool(threads: usize) -> Result<()> {
    if threads == 0 {
        return Err(error::invalid("threads", "must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| error::invalid("threads", e.to_string()))
}
