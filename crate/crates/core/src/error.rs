use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate traversal length: gamma = {gamma} (need at least {required})")]
    DegenerateGamma { gamma: i64, required: i64 },

    #[error("rejection sampler gave up after {attempts} attempts (m = {m})")]
    AttemptCap { attempts: u64, m: usize },

    #[error("q-table did not converge: doubling the path moved an entry by {max_shift:e}")]
    NonConvergence { max_shift: f64 },

    #[error("malformed arrow field: {0}")]
    Decode(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
