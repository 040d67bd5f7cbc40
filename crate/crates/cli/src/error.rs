use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or inconsistent configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Toml {
        path: String,
        #[source]
        source: toml::de::Error,
    },
    #[error("unknown recipe `{0}` (try one of fig3..fig8, table1)")]
    UnknownRecipe(String),
    #[error(transparent)]
    Core(#[from] ndc_ofdm::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for bad input, 3 for numerical trouble, 1 for
    /// anything environmental.
    pub fn exit_code(&self) -> i32 {
        use ndc_ofdm::Error as E;
        match self {
            CliError::Config(_) | CliError::Toml { .. } | CliError::UnknownRecipe(_) => 2,
            CliError::Core(E::Numerical(_) | E::Invariant(_) | E::SingularMatrix) => 3,
            CliError::Core(_) => 2,
            CliError::Io { .. } | CliError::Serialize(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Exit status when some point hit its frame cap before the error target.
pub const EXIT_LOW_CONFIDENCE: i32 = 4;
