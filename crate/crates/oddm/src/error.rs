use std::fmt;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq)]
pub enum OddmError {
    /// An argument violated a documented precondition.
    Domain(String),
    /// Two objects that must agree in shape or rate do not.
    Mismatch(String),
    /// A guarded operation was refused (e.g. a full-scale dense Gram).
    Refused(String),
    /// A linear solve could not proceed (singular system).
    Solver(String),
    /// Configuration text could not be validated; one message per problem.
    Config(Vec<String>),
    /// Filesystem or serialization failure in the harness.
    Io(String),
}

pub type Result<T> = std::result::Result<T, OddmError>;

impl fmt::Display for OddmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OddmError::Domain(m) => write!(f, "domain error: {m}"),
            OddmError::Mismatch(m) => write!(f, "mismatch: {m}"),
            OddmError::Refused(m) => write!(f, "refused: {m}"),
            OddmError::Solver(m) => write!(f, "solver error: {m}"),
            OddmError::Config(msgs) => {
                write!(f, "invalid configuration ({} problem(s)):", msgs.len())?;
                for m in msgs {
                    write!(f, "\n  - {m}")?;
                }
                Ok(())
            }
            OddmError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for OddmError {}

impl From<std::io::Error> for OddmError {
    fn from(e: std::io::Error) -> Self {
        OddmError::Io(e.to_string())
    }
}
