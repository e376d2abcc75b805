use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("value {value} is outside the support of {dist}")]
    Support { dist: &'static str, value: f64 },

    #[error("quadratic-form weights must sum to zero (sum = {0:e})")]
    WeightSum(f64),

    #[error("kernel expectation is not finite for {0}")]
    NonFiniteExpectation(String),

    #[error("rule `{rule}` does not apply to {kind} forecasts")]
    Unsupported { rule: String, kind: String },

    #[error(
        "distribution is degenerate: E[g(X,Y)] = 0 under the predictive measure; \
         use the shifted_log h-function (genkernel:h=shifted_log:gamma=...) for point-mass forecasts"
    )]
    Degenerate,

    #[error("transformed score needs strictly negative scores, got S = {0}")]
    Sign(f64),

    #[error(
        "Monte Carlo noise dominates the score differences (standard error {std_error:e} vs min D(t) {min_drop:e}); \
         raise the Monte Carlo budget (--mc-budget) or use larger t values"
    )]
    NoiseDominated { std_error: f64, min_drop: f64 },

    #[error("fitter did not converge after {iterations} iterations (last log-likelihood {loglik})")]
    NonConvergence { iterations: usize, loglik: f64 },

    #[error("observation {index}: {source}")]
    AtObservation {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("replicate {replicate}: {source}")]
    AtReplicate {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("record `{id}`: {source}")]
    AtRecord {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn at_observation(self, index: usize) -> Self {
        Error::AtObservation { index, source: Box::new(self) }
    }

    pub(crate) fn at_record(self, id: &str) -> Self {
        Error::AtRecord { id: id.to_string(), source: Box::new(self) }
    }

    pub(crate) fn at_replicate(self, replicate: usize) -> Self {
        Error::AtReplicate { replicate, source: Box::new(self) }
    }

    /// Innermost error, skipping observation/replicate wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtObservation { source, .. }
            | Error::AtReplicate { source, .. }
            | Error::AtRecord { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
