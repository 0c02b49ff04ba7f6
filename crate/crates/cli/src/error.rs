use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config {path}: {reason}")]
    Config { path: PathBuf, reason: String },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] uav_hoc::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }

    pub fn exit_code(&self) -> ExitCode {
        use uav_hoc::Error as E;
        let code = match self {
            Self::Config { .. } | Self::Usage(_) => 2,
            Self::Io { .. } => 3,
            Self::Core(e) => match e {
                E::InvalidParameter { .. } | E::EmptyInput(_) | E::InvalidPoint { .. } => 2,
                E::Io(_) | E::Format { .. } => 3,
                E::Unidentifiable(_) => 4,
            },
        };
        ExitCode::from(code)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
