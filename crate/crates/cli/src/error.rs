use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("unknown preset {name:?}; available: {}", available.join(", "))]
    UnknownPreset { name: String, available: Vec<&'static str> },
    #[error(transparent)]
    Core(#[from] contact_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type LabResult<T> = std::result::Result<T, LabError>;

impl LabError {
    /// Starvation maps to its own exit code.
    pub fn is_starvation(&self) -> bool {
        matches!(
            self,
            LabError::Core(contact_core::Error::InsufficientStatistics { .. })
        )
    }
}
