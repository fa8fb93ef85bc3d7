use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter set violates one of its invariants.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A particle left the finite numbers during a step.
    #[error("integration diverged for particle {index} at t = {time}")]
    Divergence { index: usize, time: f64 },

    /// Tangent vectors became collinear or vanished before renormalization.
    #[error("degenerate tangent matrix (norms {first:e}, {second:e}); reduce dt or chi")]
    DegenerateTangent { first: f64, second: f64 },

    #[error("insufficient scale range: {usable} usable box sizes, need at least 3")]
    InsufficientScaleRange { usable: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}
