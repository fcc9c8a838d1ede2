use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {field}: {message}")]
    Config { field: String, message: String },

    #[error("config: cases[{index}].{field}: {source}")]
    InvalidCase {
        index: usize,
        field: &'static str,
        source: gsl_core::Error,
    },

    #[error("{scenario} case {index}: {source}")]
    Scenario {
        scenario: &'static str,
        index: usize,
        source: gsl_core::Error,
    },

    #[error("{}: {}", .0.display(), .1)]
    Io(PathBuf, std::io::Error),

    #[error(transparent)]
    Core(#[from] gsl_core::Error),

    #[error("thread pool: {0}")]
    Pool(String),
}

impl CliError {
    /// 2 for configuration problems, 1 for failures during a run.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::InvalidCase { .. } => 2,
            _ => 1,
        }
    }
}
