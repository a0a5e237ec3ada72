use std::path::PathBuf;

use thiserror::Error;
use tsaction_core::phase_model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
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
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}", invalid_tensor_message(.0))]
    InvalidTensor(ValidationReport),
    #[error(transparent)]
    Core(#[from] tsaction_core::Error),
}

fn invalid_tensor_message(report: &ValidationReport) -> String {
    let mut msg = format!("coupling tensor has {} constraint violation(s):", report.violations.len());
    for v in &report.violations {
        msg.push_str("\n  ");
        msg.push_str(&v.to_string());
    }
    msg
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// True when a trajectory blew up numerically.
    pub fn is_divergence(&self) -> bool {
        let mut e = match self {
            Error::Core(e) => e,
            _ => return false,
        };
        loop {
            match e {
                tsaction_core::Error::Divergence { .. } => return true,
                tsaction_core::Error::Trajectory { source, .. } => e = source,
                _ => return false,
            }
        }
    }

    /// Process exit code: 3 for numerical divergence, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.is_divergence() {
            3
        } else {
            2
        }
    }
}
