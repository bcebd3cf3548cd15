use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or inconsistent input; exit code 2.
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Model(#[from] tau2_core::Error),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Model(tau2_core::Error::InvalidP(_))
            | CliError::Model(tau2_core::Error::NoSites)
            | CliError::Model(tau2_core::Error::InvalidParameter(_)) => 2,
            CliError::Model(_) => 1,
        }
    }
}
