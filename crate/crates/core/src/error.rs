use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// The requested region is empty or a mesh could not be built.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// An input violates a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// An iterative or direct solver failed.
    #[error("solver error: {message} (best residual {best_residual:e})")]
    Solver { message: String, best_residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn geometry(msg: impl Into<String>) -> Self {
        Error::Geometry(msg.into())
    }

    pub(crate) fn solver(msg: impl Into<String>, best_residual: f64) -> Self {
        Error::Solver {
            message: msg.into(),
            best_residual,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
