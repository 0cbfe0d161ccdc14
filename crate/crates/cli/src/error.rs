/// Failures of a run, each mapped to an exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable, malformed or invalid input.
    #[error("input error at {field}: {message}")]
    Input { field: String, message: String },

    /// A numerical failure inside one of the library stages.
    #[error("numerical error in {stage}: {source}")]
    Numerical {
        stage: &'static str,
        #[source]
        source: pencil_core::Error,
    },
}

impl CliError {
    pub fn input(field: &str, message: impl Into<String>) -> Self {
        CliError::Input {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn numerical(stage: &'static str) -> impl FnOnce(pencil_core::Error) -> CliError {
        move |source| CliError::Numerical { stage, source }
    }

    /// 2 for input errors, 3 for numerical errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input { .. } => 2,
            CliError::Numerical { .. } => 3,
        }
    }
}
