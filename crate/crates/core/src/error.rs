use thiserror::Error;

pub type Result<T> = std::result::Result<T, ScreenError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScreenError {
    #[error("{name} must lie in {range}, got {value}")]
    OutOfRange {
        name: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("test is not informative: Youden's J = {0} (must be > 0)")]
    UninformativeTest(f64),

    /// Both the numerator and the denominator of Bayes' rule vanish
    /// (zero prevalence with a perfectly specific test).
    #[error("PPV is indeterminate (0/0) at prevalence {prevalence} with specificity 1")]
    IndeterminateForm { prevalence: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "target PPV {target} cannot be reached: positive likelihood ratio {likelihood_ratio} <= 1"
    )]
    UnreachableTarget { target: f64, likelihood_ratio: f64 },

    #[error("{required} positive iterations required, more than the supported {limit}")]
    IterationLimit { required: f64, limit: u64 },

    #[error("only {observed} positive draws, need at least {required}")]
    InsufficientPositives { observed: u64, required: u64 },

    #[error("{observed} samples requested, need at least {required}")]
    TooFewSamples { observed: u64, required: u64 },

    #[error("trajectory is empty")]
    EmptyTrajectory,
}

impl ScreenError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        ScreenError::Domain(msg.into())
    }
}
