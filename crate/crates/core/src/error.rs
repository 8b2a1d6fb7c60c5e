use thiserror::Error;

/// Errors raised by the channel models, solvers and experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Normal equations that cannot be solved without regularization.
    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("singular gradient: |h[{index}]| = {magnitude:e} is below {threshold:e}")]
    SingularGradient {
        index: usize,
        magnitude: f64,
        threshold: f64,
    },

    #[error("solver breakdown at iteration {iteration}: {reason}")]
    SolverBreakdown { iteration: usize, reason: String },

    /// A configuration value is out of range. `keys` names the offending fields.
    #[error("invalid config ({}): {message}", keys.join(", "))]
    InvalidConfig { keys: Vec<String>, message: String },

    #[error("experiment gate: {failed} of {total} trials failed for estimator {estimator}")]
    ExperimentGate {
        estimator: String,
        failed: usize,
        total: usize,
    },
}

impl Error {
    pub(crate) fn config(keys: &[&str], message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            keys: keys.iter().map(|k| k.to_string()).collect(),
            message: message.into(),
        }
    }

    /// True for failures of the numerical kind (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem(_)
                | Error::SingularGradient { .. }
                | Error::SolverBreakdown { .. }
                | Error::DegenerateInput(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
