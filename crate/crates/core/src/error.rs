use std::fmt;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Stable codes for data-file validation failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    Malformed,
    SelfLoop,
    DuplicateEdge,
    NodeRange,
    LabelRange,
    SplitOverlap,
    FeatureLength,
    Version,
    ArchitectureMismatch,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::Malformed => "E_MALFORMED",
            ErrorCode::SelfLoop => "E_SELF_LOOP",
            ErrorCode::DuplicateEdge => "E_DUPLICATE_EDGE",
            ErrorCode::NodeRange => "E_NODE_RANGE",
            ErrorCode::LabelRange => "E_LABEL_RANGE",
            ErrorCode::SplitOverlap => "E_SPLIT_OVERLAP",
            ErrorCode::FeatureLength => "E_FEATURE_LENGTH",
            ErrorCode::Version => "E_VERSION",
            ErrorCode::ArchitectureMismatch => "E_ARCH_MISMATCH",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no labeled nodes")]
    NoLabeledNodes,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("budget exceeds pool: requested {budget} queries from a pool of {pool}")]
    BudgetExceedsPool { budget: usize, pool: usize },

    #[error("node {0} is not in the train split")]
    NotInTrainSplit(usize),

    #[error("node {0} is not a candidate")]
    NotACandidate(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{code}: {message}")]
    Data { code: ErrorCode, message: String },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn data(code: ErrorCode, message: impl Into<String>) -> Self {
        Error::Data {
            code,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// The validation code, for data errors.
    pub fn code(&self) -> Option<ErrorCode> {
        match self {
            Error::Data { code, .. } => Some(*code),
            _ => None,
        }
    }
}
