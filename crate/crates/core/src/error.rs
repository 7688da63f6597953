use thiserror::Error;

/// Errors produced by the toolkit.
///
/// Variants are grouped by how the CLI reports them: configuration and
/// parameter problems map to exit code 1, violated numerical invariants
/// (defects detected in assembled data) map to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("classification failed: {0}")]
    Classification(String),

    #[error("operation requires a {expected} attenuation coefficient, got {got}")]
    WrongClass { expected: &'static str, got: &'static str },

    #[error("geometry violation: {0}")]
    Geometry(String),

    #[error("numerical invariant violated: {0}")]
    Numerics(String),

    #[error("limit does not exist: {0}")]
    NoLimit(String),

    #[error("guard: {0}")]
    Guard(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// Exit code the CLI uses for this error: 1 for validation problems,
    /// 2 for violated numerical invariants.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerics(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
