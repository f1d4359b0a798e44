use thiserror::Error;

/// Exit code for a bad or unreadable configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for a solver, quadrature or integrator failure.
pub const EXIT_NUMERICAL: i32 = 3;
/// Exit code for failing to write outputs.
pub const EXIT_IO: i32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {reason}")]
    Read { path: String, reason: String },

    #[error("malformed config: {0}")]
    Parse(String),

    #[error("config field `{field}`: {reason}")]
    Field { field: String, reason: String },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("numerical failure: {0}")]
    Numerical(#[from] cqwell::Error),

    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(e) => match e {
                cqwell::Error::InvalidParam { .. }
                | cqwell::Error::IndexOutOfRange { .. }
                | cqwell::Error::UnknownObservable(_) => EXIT_CONFIG,
                _ => EXIT_NUMERICAL,
            },
            CliError::Io { .. } => EXIT_IO,
        }
    }
}
