//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the estimation pipeline.
///
/// Variants split into two families: *validation* errors (bad parameters,
/// malformed inputs, domain violations) and *numerical* errors (a computation
/// that started from valid inputs failed to produce a usable result). The CLI
/// maps the former to exit code 2 and the latter to exit code 3, see
/// [`DeconvError::is_numerical`].
#[derive(Debug, Error)]
pub enum DeconvError {
    /// A distribution or configuration parameter is outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Density requested for a law that has an atom.
    #[error("law {0} has no Lebesgue density")]
    NoDensity(String),

    /// Generic precondition violation on an operation's inputs.
    #[error("domain error: {0}")]
    Domain(String),

    /// A coefficient sequence does not belong to the candidate class.
    #[error("model class violation: {0}")]
    ModelClass(String),

    /// Requested optimizer initialization cannot be built.
    #[error("unsupported initialization: {0}")]
    UnsupportedInit(String),

    /// Theoretical parameter formulas produced a degenerate configuration.
    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    /// Two tabulated functions live on different evaluation grids.
    #[error("mismatched evaluation grids: {0}")]
    MismatchedGrids(String),

    /// The optimizer diverged (non-finite objective). Carries the iterate.
    #[error("numerical failure: {message}")]
    NumericalFailure {
        message: String,
        iterate: Vec<f64>,
    },

    /// The Fourier inversion integral failed its realness check.
    #[error(
        "symmetry violation: imaginary residual {imag:+e} at t = {t} (real part {real:+e})"
    )]
    SymmetryViolation { t: f64, imag: f64, real: f64 },

    /// A text input failed to parse.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl DeconvError {
    /// True for failures of the numerics themselves (CLI exit code 3);
    /// false for validation/input errors (exit code 2).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            DeconvError::NumericalFailure { .. } | DeconvError::SymmetryViolation { .. }
        )
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        DeconvError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = DeconvError> = std::result::Result<T, E>;
