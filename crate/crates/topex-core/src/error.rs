use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("step {requested} exceeds the configured cap {cap}")]
    StepCapExceeded { requested: usize, cap: usize },

    #[error("size limit exceeded while {what}: needs {requested}, cap is {cap}")]
    SizeLimit {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("{0}")]
    Domain(String),

    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }
}
