use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a subgroup: {a} * {b} = {product} is outside the subset")]
    NotClosed { a: usize, b: usize, product: usize },

    #[error("dimension mismatch: {0}D vs {1}D")]
    DimensionMismatch(usize, usize),

    #[error("q[{index}] = 0 where p[{index}] = {p} > 0")]
    NotAbsolutelyContinuous { index: usize, p: f64 },

    #[error(
        "infeasible: free motion volume {free} <= 0 \
         (containment {containment}, collision {collision})"
    )]
    Infeasible {
        free: f64,
        containment: f64,
        collision: f64,
    },

    #[error("{field}: {message}")]
    Schema { field: String, message: String },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for every error in the invalid-argument family.
    pub fn is_invalid_argument(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::NotClosed { .. }
                | Error::DimensionMismatch(..)
                | Error::NotAbsolutelyContinuous { .. }
                | Error::Schema { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
