use thiserror::Error;

/// Errors shared across the simulator modules.
#[derive(Debug, Clone, Error)]
pub enum SimError {
    #[error("cutoff mismatch: {left} vs {right}")]
    CutoffMismatch { left: usize, right: usize },

    #[error("photon number {n} exceeds cutoff {cutoff}")]
    ExceedsCutoff { n: usize, cutoff: usize },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("truncation tail mass {tail:.3e} exceeds tolerance {tol:.3e} at cutoff {cutoff}")]
    Truncation { tail: f64, tol: f64, cutoff: usize },

    #[error("empty support: both distributions vanish on the common grid")]
    EmptySupport,

    #[error("shape mismatch: tables have {left} and {right} cells")]
    ShapeMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dump parse error: {0}")]
    Parse(String),
}
