use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("config key `{key}`: {msg}")]
    Key { key: String, msg: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] lane_emden::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed manifest: {0}")]
    Manifest(#[from] serde_json::Error),

    /// A run finished but a certificate or the uniqueness check did not pass.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// Process exit status: 2 for configuration and input problems, 3 for
    /// failed certificates, 4 for numerical non-convergence.
    pub fn exit_code(&self) -> i32 {
        use lane_emden::Error as E;
        match self {
            CliError::Syntax { .. } | CliError::Key { .. } | CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Manifest(_) => 2,
            CliError::Failed(_) => 3,
            CliError::Core(e) => match e {
                E::Config(_) | E::Shape(_) | E::Precondition(_) | E::RecipeMismatch(_) | E::Io(_) => 2,
                E::Certificate(_) | E::Enclosure { .. } | E::Singularity { .. } => 3,
                E::IterationLimit { .. } | E::NotConverged(_) | E::Internal(_) => 4,
            },
        }
    }
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}
