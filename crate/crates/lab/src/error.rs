use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] wslln_core::Error),

    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("bad configuration: {0}")]
    Config(String),

    #[error("unknown example `{0}`; see `list-examples`")]
    UnknownExample(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

impl LabError {
    /// 2 for anything the user typed wrong, 3 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Core(wslln_core::Error::Syntax { .. }) | LabError::Json(_) | LabError::Config(_) | LabError::UnknownExample(_) => 2,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }
}

pub(crate) fn config(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}
