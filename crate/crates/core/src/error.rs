use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("size guard exceeded: {0}")]
    TooLarge(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("truncation too large: {detail}; try n_max >= {suggested_n_max}")]
    Truncation {
        detail: String,
        suggested_n_max: usize,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
