use sdc_core::SdcError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] SdcError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
    #[error("label file {path}: {message}")]
    Labels { path: String, message: String },
    #[error("session {0}")]
    Session(String),
}

impl CliError {
    /// 2 for datasets that cannot be clustered at all, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_degenerate_dataset() => 2,
            _ => 1,
        }
    }
}
