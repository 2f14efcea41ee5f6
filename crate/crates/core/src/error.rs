use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate path")]
    DegeneratePath,
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("first return time is undefined for real-valued paths")]
    FirstReturnUndefined,
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("embedding failed: eigenvalue {value:e} at index {index} below tolerance")]
    EmbeddingFailed { index: usize, value: f64 },
    #[error("regime not covered: {0}")]
    RegimeNotCovered(String),
    #[error("underpowered grid: p_hat = 0 at n = {0}")]
    UnderpoweredGrid(u64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("enumeration budget exceeded: more than {0} branches")]
    BudgetExceeded(u64),
    #[error("unsupported system: {0}")]
    UnsupportedSystem(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
