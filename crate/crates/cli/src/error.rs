use std::fmt;

/// A config or input that fails validation (exit status 2).
#[derive(Debug)]
pub struct Invalid(pub String);

impl Invalid {
    pub fn new(msg: impl Into<String>) -> Self {
        Invalid(msg.into())
    }
}

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid input: {}", self.0)
    }
}

impl std::error::Error for Invalid {}

impl From<spectral_drop::Error> for Invalid {
    fn from(e: spectral_drop::Error) -> Self {
        Invalid(e.to_string())
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Exit status for an error chain.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<Invalid>().is_some() {
            return EXIT_INVALID;
        }
        if let Some(e) = cause.downcast_ref::<spectral_drop::Error>() {
            return match e {
                spectral_drop::Error::Validation(_) | spectral_drop::Error::Geometry(_) => {
                    EXIT_INVALID
                }
                spectral_drop::Error::Solver { .. } => EXIT_SOLVER,
                spectral_drop::Error::Io(_) => EXIT_OTHER,
            };
        }
    }
    EXIT_OTHER
}
