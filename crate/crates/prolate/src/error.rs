use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {what} at x = {at}")]
    Domain { what: String, at: f64 },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("index {k} outside the tabulated window [{lo}, {hi}]")]
    Window { k: i64, lo: i64, hi: i64 },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("quadrature error: {0}")]
    Quadrature(String),
}

impl Error {
    pub(crate) fn domain(what: impl Into<String>, at: f64) -> Self {
        Error::Domain { what: what.into(), at }
    }

    pub(crate) fn shape(expected: impl ToString, got: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
