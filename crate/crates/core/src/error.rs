use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The interior block of the admittance Laplacian could not be factored.
    /// `rcond` is the ratio of smallest to largest LU pivot modulus.
    #[error("singular interior block (pivot-ratio condition estimate {rcond:.3e})")]
    Singular { rcond: f64 },

    #[error("asymmetric boundary response: off-diagonal spread {spread:.3e} exceeds {tol:.1e}")]
    Asymmetric { spread: f64, tol: f64 },

    #[error("dissipation functional is not coercive: edge {edge} has Re(z) = {re:e}")]
    NotCoercive { edge: usize, re: f64 },

    #[error("no convergence after {iterations} iterations (last step {last_step:.3e})")]
    NonConvergence { iterations: usize, last_step: f64 },

    #[error("effective impedance estimates disagree: regularized limit {path} vs fixed point {fixed} (relative gap {gap:.3e})")]
    Disagreement {
        path: Complex64,
        fixed: Complex64,
        gap: f64,
    },

    #[error("non-dissipative: t = 2w^2LC = {t:.6} gives Re(Zeff) -> 0 (limit {limit})")]
    NonDissipative { t: f64, limit: Complex64 },

    #[error("level {level} exceeds the configured bound {max}")]
    LevelTooDeep { level: usize, max: usize },

    #[error("spectrum violates |l3| < |l2| < |l1| = 1: {0}")]
    Spectrum(String),

    #[error("boundary data is constant (zero dissipation)")]
    ConstantPotential,

    #[error("numerical breakdown: {0}")]
    Numerical(String),

    #[error("check `{name}` violated: {detail}")]
    Violation { name: &'static str, detail: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
