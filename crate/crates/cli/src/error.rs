use halo_core::Error as CoreError;
use halo_dynamics::DynamicsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config {file}: {path}: {msg}")]
    Config {
        file: String,
        path: String,
        msg: String,
    },
    #[error("{context}: {msg}")]
    Numerical { context: String, msg: String },
    #[error("{0} table cell(s) outside tolerance")]
    Acceptance(usize),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } | CliError::Io(_) => 1,
            CliError::Numerical { .. } => 2,
            CliError::Acceptance(_) => 3,
        }
    }

    pub fn core(context: &str, e: CoreError) -> Self {
        match e {
            CoreError::Domain { .. }
            | CoreError::UnknownCase(_)
            | CoreError::UnsupportedPoint(_)
            | CoreError::Degree(_) => CliError::Usage(format!("{context}: {e}")),
            other => CliError::Numerical {
                context: context.to_string(),
                msg: other.to_string(),
            },
        }
    }

    pub fn dynamics(context: &str, e: DynamicsError) -> Self {
        match e {
            DynamicsError::Core(c) => CliError::core(context, c),
            DynamicsError::Tolerance(_) => CliError::Usage(format!("{context}: {e}")),
            other => CliError::Numerical {
                context: context.to_string(),
                msg: other.to_string(),
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Attaches a module context to core and dynamics errors.
pub trait Context<T> {
    fn ctx(self, context: &str) -> Result<T>;
}

impl<T> Context<T> for std::result::Result<T, CoreError> {
    fn ctx(self, context: &str) -> Result<T> {
        self.map_err(|e| CliError::core(context, e))
    }
}

impl<T> Context<T> for std::result::Result<T, DynamicsError> {
    fn ctx(self, context: &str) -> Result<T> {
        self.map_err(|e| CliError::dynamics(context, e))
    }
}
