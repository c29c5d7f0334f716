use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("memory budget exceeded: need {required} bytes, allowed {allowed}")]
    BudgetExceeded { required: u64, allowed: u64 },

    #[error("parameters inconsistent with variant: {0}")]
    InconsistentParams(String),

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("grid has no backpointers (rolling mode)")]
    MissingBackpointers,

    #[error("wrong variant: {0}")]
    WrongVariant(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("empty sample")]
    EmptySample,

    #[error("invalid cdf: {0}")]
    InvalidCdf(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error("output already exists and differs: {0}")]
    ResumeMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
