use thiserror::Error;

/// Coarse classification of failures, used by the command line for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    ModelContract,
    Numerical,
    Config,
    UnknownModel,
    UnknownEstimator,
    Io,
}

impl ErrorCategory {
    /// Process exit code for this category. Zero is reserved for success and
    /// one for failed self-tests.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::UnknownModel => 3,
            ErrorCategory::UnknownEstimator => 4,
            ErrorCategory::Io => 5,
            ErrorCategory::ModelContract => 6,
            ErrorCategory::Numerical => 7,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("model contract violated: {0}")]
    ModelContract(String),

    #[error("{what} has shape {got}, expected {expected}")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("parameter index {index} out of range for {count} parameters")]
    ParamIndex { index: usize, count: usize },

    #[error("simulation diverged (non-finite state) at step {step}")]
    Divergence { step: usize },

    #[error("propensity of reaction {reaction} is negative ({value})")]
    NegativePropensity { reaction: usize, value: f64 },

    #[error("path exceeded the cap of {cap} jumps")]
    Explosion { cap: usize },

    #[error("score undefined: reaction {reaction} has zero propensity but nonzero parameter derivative")]
    ScoreUndefined { reaction: usize },

    #[error("singular linear system in grid solver at row {row}")]
    SingularSystem { row: usize },

    #[error("state-space truncation too small: boundary mass {mass:e} exceeds {tolerance:e}")]
    Truncation { mass: f64, tolerance: f64 },

    #[error("truncated state space has {states} states, limit is {limit}")]
    StateSpaceTooLarge { states: usize, limit: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown model id `{0}`")]
    UnknownModel(String),

    #[error("unknown estimator id `{0}`")]
    UnknownEstimator(String),

    #[error("estimator `{estimator}` does not apply to {kind} models")]
    EstimatorModelMismatch {
        estimator: &'static str,
        kind: &'static str,
    },

    #[error("statistics of an empty sample")]
    EmptySample,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::ModelContract(_)
            | Error::Shape { .. }
            | Error::ParamIndex { .. }
            | Error::NegativePropensity { .. }
            | Error::ScoreUndefined { .. } => ErrorCategory::ModelContract,
            Error::Divergence { .. }
            | Error::Explosion { .. }
            | Error::SingularSystem { .. }
            | Error::Truncation { .. }
            | Error::StateSpaceTooLarge { .. }
            | Error::EmptySample => ErrorCategory::Numerical,
            Error::Config(_) | Error::EstimatorModelMismatch { .. } => ErrorCategory::Config,
            Error::UnknownModel(_) => ErrorCategory::UnknownModel,
            Error::UnknownEstimator(_) => ErrorCategory::UnknownEstimator,
            Error::Io { .. } => ErrorCategory::Io,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(what: &'static str, got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::Shape { what, expected, got })
    }
}
