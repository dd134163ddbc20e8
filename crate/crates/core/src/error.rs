use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("all-missing feature {0}")]
    AllMissingFeature(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("duplicate sample index {0}")]
    DuplicateIndex(usize),
    #[error("no range recorded for depth {depth}, node {node}")]
    UnknownNode { depth: usize, node: usize },
    #[error("degenerate node: hessian sum plus lambda is zero")]
    DegenerateNode,
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("no samples")]
    NoSamples,
    #[error("model format: {0}")]
    ModelFormat(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short stable identifier used in machine-parsable CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::AllMissingFeature(_) => "all_missing_feature",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DuplicateIndex(_) => "duplicate_index",
            Error::UnknownNode { .. } => "unknown_node",
            Error::DegenerateNode => "degenerate_node",
            Error::Contract(_) => "contract",
            Error::MalformedTree(_) => "malformed_tree",
            Error::UndefinedMetric(_) => "undefined_metric",
            Error::Parse { .. } => "parse",
            Error::NoSamples => "no_samples",
            Error::ModelFormat(_) => "model_format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
