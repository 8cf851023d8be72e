use mtm::MtmError;
use std::fmt;
use std::process::ExitCode;

/// A command failure with its exit-code class.
#[derive(Debug)]
pub enum Failure {
    /// Reading input or writing output failed (exit 1).
    Io(String),
    /// Flags or input values are invalid (exit 2).
    Validation(String),
    /// The estimator or a numerical routine failed (exit 3).
    Estimation(String),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Io(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Estimation(_) => 3,
        })
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Io(m) | Failure::Validation(m) | Failure::Estimation(m) => f.write_str(m),
        }
    }
}

impl From<MtmError> for Failure {
    fn from(e: MtmError) -> Self {
        match e {
            MtmError::Io(_) | MtmError::Csv(_) => Failure::Io(e.to_string()),
            MtmError::Validation(_) => Failure::Validation(e.to_string()),
            _ => Failure::Estimation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(format!("csv error: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(format!("json error: {e}"))
    }
}
