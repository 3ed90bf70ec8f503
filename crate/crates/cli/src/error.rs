use std::fmt;

/// Failure classes with their process exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed or missing input: exit 1.
    Input(String),
    /// Solver failure or a hard invariant violated: exit 2.
    Solver(String),
    /// Verification checks failed: exit 3.
    Verification(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
            CliError::Verification(ids) => write!(f, "failed checks: {}", ids.join(", ")),
        }
    }
}

impl std::error::Error for CliError {}

impl From<polyot::io::IoError> for CliError {
    fn from(e: polyot::io::IoError) -> Self {
        CliError::Input(e.to_string())
    }
}
