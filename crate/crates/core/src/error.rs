use thiserror::Error;

/// Errors produced by the restoration library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("field contains a non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("field is empty")]
    EmptyField,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("kernel of size {kernel:?} does not fit a {image:?} image")]
    KernelTooLarge {
        kernel: (usize, usize),
        image: (usize, usize),
    },

    #[error("image of size {image:?} is smaller than the {window}x{window} window")]
    WindowTooLarge { window: usize, image: (usize, usize) },

    #[error("stability bound violated for the {scheme} scheme at iteration {iteration}: lhs {lhs} > bound {bound}")]
    CflViolation {
        scheme: &'static str,
        iteration: usize,
        lhs: f64,
        bound: f64,
    },

    #[error("non-finite value in {stage} at iteration {iteration}")]
    NumericalAbort { stage: &'static str, iteration: usize },

    #[error("L-infinity growth bound violated at iteration {iteration}: {norm} > {bound}")]
    GrowthBoundViolated { iteration: usize, norm: f64, bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
