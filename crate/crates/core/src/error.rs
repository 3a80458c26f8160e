use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("circulant embedding not non-negative definite: min eigenvalue {min_eigenvalue:e}, max {max_eigenvalue:e}")]
    EmbeddingFailed { min_eigenvalue: f64, max_eigenvalue: f64 },

    #[error("lag tau = 1 missing from the lag grid")]
    MissingUnitLag,

    #[error("moment order q = 1 missing from the q grid")]
    MissingUnitMoment,

    #[error("collinear design: all moment orders are equal")]
    Collinear,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("too many degenerate surrogates: {kept} of {requested} usable, floor is {floor}")]
    SurrogateFloor { kept: usize, requested: usize, floor: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
