//! Error types shared across the library.

use thiserror::Error;

/// Errors produced by group arithmetic, potentials and experiment drivers.
#[derive(Debug, Clone, Error)]
pub enum LieError {
    #[error("dimension mismatch: {0}x{0} vs {1}x{1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix is not orthogonal: defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotOrthogonal { defect: f64, tol: f64 },

    #[error("matrix has determinant {det:.6} instead of +1")]
    NotSpecial { det: f64 },

    /// A rotation angle of the argument sits within `tol` of the principal
    /// branch cut at pi, so the logarithm is not uniquely defined.
    #[error("rotation angle {angle:.12} is within {tol:.1e} of the branch cut at pi")]
    AngleAtCut { angle: f64, tol: f64 },

    /// `ad_{log g}` has operator norm too close to 2*pi for the dlog power
    /// series to converge at the requested accuracy.
    #[error("ad operator norm {norm:.6} is too close to the series radius 2*pi")]
    SeriesDivergence { norm: f64 },

    #[error("argument {value} outside the open interval ({lo}, {hi})")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("spectrum is degenerate: adjacent eigenvalue gap {gap:.3e} is not positive")]
    DegenerateSpectrum { gap: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("convergence tail too short: {len} usable iterations, need at least {need}")]
    TailTooShort { len: usize, need: usize },

    #[error("insufficient sweep points: {got} surviving, need at least {need}{context}")]
    InsufficientPoints {
        got: usize,
        need: usize,
        context: String,
    },
}

pub type Result<T> = std::result::Result<T, LieError>;
