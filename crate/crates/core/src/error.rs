use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resonance: k·ω = 0 at k = {k:?}")]
    Resonance { k: Vec<i64> },

    #[error("aliasing: grid resolution {n} too small for cutoff {k} (need N ≥ 2K+2)")]
    Aliasing { n: usize, k: i64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("Jacobian not certifiably invertible: |DΦ−Id| estimate {estimate} ≥ 1")]
    NonInvertibleJacobian { estimate: f64 },

    #[error("solver divergence after {iterations} iterations; residual history {history:?}")]
    Divergence {
        iterations: usize,
        history: Vec<f64>,
    },

    #[error("no witness mode found for any requested τ_j up to |k| ≤ {cutoff}")]
    EmptySupport { cutoff: i64 },

    #[error("continued-fraction precision exhausted after {trustworthy} terms")]
    PrecisionExhausted { trustworthy: usize },

    #[error("threshold violated: {0}")]
    ThresholdViolated(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
