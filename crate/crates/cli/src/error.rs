use std::fmt;

/// Failure of a command, carrying the process exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Physics(String),
    /// The report was written but the fit did not converge.
    NotConverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Physics(_) => 3,
            CliError::NotConverged(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Physics(m) => write!(f, "physics error: {m}"),
            CliError::NotConverged(m) => write!(f, "fit did not converge: {m}"),
        }
    }
}

impl From<nvcoh::Error> for CliError {
    fn from(e: nvcoh::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Physics(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
