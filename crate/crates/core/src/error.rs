use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A geometric parameter violates its invariant (non-positive length, non-finite value...).
    #[error("invalid geometry: `{field}` = {value} ({reason})")]
    InvalidGeometry {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The geometry is valid but the requested quantity is undefined for it.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
