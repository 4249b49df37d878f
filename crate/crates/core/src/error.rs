use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("graph has no edges")]
    NoEdges,

    #[error("graph too small: need at least {need} nodes, got {got}")]
    TooSmall { need: usize, got: usize },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("generator failed to produce a connected graph after {attempts} attempts")]
    GenerationFailed { attempts: u32 },

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("feature `{0}` is constant on the training rows")]
    ConstantFeature(String),

    #[error("dataset split `{0}` is empty")]
    EmptySplit(&'static str),

    #[error("not enough training rows: {rows} rows for {features} features")]
    Underdetermined { rows: usize, features: usize },

    #[error("rewiring operator {0} is not applicable")]
    NotApplicable(crate::search::OpKind),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Diverged { epoch: usize },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
