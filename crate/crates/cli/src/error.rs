use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad config file, flag or argument.
    #[error("config error: {0}")]
    Config(String),
    /// Synthesis, simulation or I/O failure after a valid configuration.
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Runtime(_) => 3,
        }
    }
}

impl From<adversary_core::Error> for CliError {
    fn from(e: adversary_core::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}
