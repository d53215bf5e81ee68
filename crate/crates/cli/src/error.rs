use std::path::PathBuf;

use grassmannian::graph::GraphError;
use grassmannian::grassmann::GrassmannError;
use grassmannian::operators::OperatorError;
use grassmannian::wigner::WignerError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("malformed input {path}: {source}")]
    Malformed { path: PathBuf, source: serde_json::Error },
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) | CliError::Read { .. } | CliError::Write { .. } | CliError::Malformed { .. } => 2,
            CliError::Dimension(_) => 3,
        }
    }
}

impl From<GrassmannError> for CliError {
    fn from(e: GrassmannError) -> Self {
        match e {
            GrassmannError::DimensionMismatch(_)
            | GrassmannError::InvalidDimension { .. }
            | GrassmannError::InsufficientAmbient { .. } => CliError::Dimension(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::MixedDimensions(_) | GraphError::InsufficientAmbient { .. } => {
                CliError::Dimension(e.to_string())
            }
            GraphError::DuplicateVertex(..) => CliError::Usage(e.to_string()),
            GraphError::Grassmann(g) => g.into(),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<OperatorError> for CliError {
    fn from(e: OperatorError) -> Self {
        match e {
            OperatorError::DimensionMismatch(_) => CliError::Dimension(e.to_string()),
            OperatorError::Grassmann(g) => g.into(),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<WignerError> for CliError {
    fn from(e: WignerError) -> Self {
        match e {
            WignerError::OracleDimension { .. } => CliError::Dimension(e.to_string()),
            WignerError::InsufficientAmbient { .. } | WignerError::Precondition(_) => {
                CliError::Usage(e.to_string())
            }
            WignerError::Grassmann(g) => g.into(),
            WignerError::Graph(g) => g.into(),
            WignerError::Operator(o) => o.into(),
            other => CliError::Failed(other.to_string()),
        }
    }
}
