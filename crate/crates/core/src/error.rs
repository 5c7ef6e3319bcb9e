use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("invalid input: {0}")]
    Domain(String),

    #[error("singular design: {0}")]
    SingularDesign(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("positivity violation: unit {unit} has propensity {score:e}")]
    Positivity { unit: String, score: f64 },

    #[error("treatment arm {arm} is empty")]
    EmptyArm { arm: u8 },

    #[error("non-finite weight factor for unit {unit} at t={t}")]
    NonFiniteWeight { unit: String, t: usize },

    #[error("poisson mean overflow: log-mean {log_mean:.1} for unit {unit}; review causal_effect/confounding")]
    PoissonOverflow { unit: usize, log_mean: f64 },

    #[error(
        "{failed} of {total} replicates failed, exceeding the 1% budget (first failure: {first})"
    )]
    FailureBudget {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("{path}: row {row}, column `{column}`: {message}")]
    Schema {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by malformed input files rather than by the data.
    pub fn is_schema(&self) -> bool {
        matches!(self, Error::Schema { .. } | Error::Csv { .. })
    }
}
