use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Validation(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] delta_core::Error),
    #[error("seed {seed}: {source}")]
    Seed {
        seed: u64,
        #[source]
        source: Box<HarnessError>,
    },
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Self::Validation(msg.into())
    }

    /// Whether the failure is the caller's input rather than the run itself.
    pub fn is_validation(&self) -> bool {
        match self {
            Self::Validation(_) | Self::Config { .. } | Self::Parse { .. } => true,
            Self::Core(e) => matches!(
                e,
                delta_core::Error::InvalidArgument(_)
                    | delta_core::Error::BudgetExceedsPool { .. }
                    | delta_core::Error::NoLabeledSource
                    | delta_core::Error::InvalidGraph(_)
                    | delta_core::Error::NodeOutOfRange { .. }
            ),
            Self::Seed { source, .. } => source.is_validation(),
            Self::Io { .. } | Self::Json { .. } => false,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_validation() {
            2
        } else {
            1
        }
    }

    pub(crate) fn with_seed(self, seed: u64) -> Self {
        Self::Seed {
            seed,
            source: Box::new(self),
        }
    }
}
