use std::path::{Path, PathBuf};

/// Failures surfaced by a subcommand, with their process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] netrefine::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for I/O, format and provider failures; 3 for violated constraints.
    pub fn exit_code(&self) -> i32 {
        use netrefine::Error as E;
        match self {
            CliError::Core(
                E::ShapeMismatch { .. } | E::OutOfBounds { .. } | E::Parameter(_) | E::Input(_),
            ) => 3,
            CliError::Core(_) | CliError::Json(_) | CliError::Io { .. } => 2,
        }
    }
}
