use spectral_bounds::BoundsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),

    #[error("{op}: {source}")]
    Math { op: &'static str, source: BoundsError },

    #[error("{0}")]
    Verification(String),

    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn math(op: &'static str, source: BoundsError) -> Self {
        CliError::Math { op, source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Output(_) => 2,
            CliError::Math { .. } => 3,
            CliError::Verification(_) => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
