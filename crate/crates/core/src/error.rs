use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate interface normal at {point:?}: |grad phi| = {grad_norm:.3e}")]
    DegenerateNormal { point: Vec<f64>, grad_norm: f64 },

    #[error(
        "interface projection did not converge after {iterations} iterations \
         (candidate {candidate}, residual {residual:.3e}, last iterate {last:?})"
    )]
    ProjectionFailed {
        candidate: usize,
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },

    #[error("interface sampling failed for candidate {candidate}: {reason}")]
    SamplingFailed { candidate: usize, reason: String },

    #[error("point lies on the interface; the piecewise value is ambiguous there")]
    AmbiguousRegion,

    #[error("empty sample category: {0}")]
    EmptySamples(&'static str),

    #[error("non-finite {what} in layer {layer} of {net}")]
    NonFiniteGradient {
        what: &'static str,
        layer: usize,
        net: &'static str,
    },

    #[error("non-finite {what} at epoch {epoch}")]
    NonFinite { what: String, epoch: u64 },

    #[error("training aborted at level {level}: {source}")]
    LevelFailed {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("problem `{0}` has no exact solution; error metrics are unavailable")]
    NoExactSolution(String),

    #[error("relative error undefined: exact solution vanishes on the evaluation grid")]
    UndefinedRatio,

    #[error("unknown problem `{name}`; available: {available}")]
    UnknownProblem { name: String, available: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
