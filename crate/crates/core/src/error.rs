use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Problems with the `<`…`>` PET markers of an example text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarkerError {
    #[error("no `<`…`>` PET marker pair found")]
    Missing,
    #[error("more than one PET marker pair found")]
    Multiple,
    #[error("unbalanced PET markers")]
    Unbalanced,
    #[error("PET marker pair encloses an empty span")]
    EmptySpan,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid example `{id}`: {reason}")]
    InvalidExample { id: String, reason: String },
    #[error(transparent)]
    Marker(#[from] MarkerError),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("invalid binary label `{0}`, expected 0 or 1")]
    InvalidLabel(String),
    #[error("{count} record(s) rejected, first at line {first_line}: {first_reason}")]
    Rejected {
        count: usize,
        first_line: usize,
        first_reason: String,
    },

    #[error("vector dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("zero-norm vector")]
    ZeroNorm,
    #[error("invalid vector: {0}")]
    InvalidVector(String),
    #[error("{path}:{line}: ragged row, expected {expected} components, found {found}")]
    RaggedRow {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate token `{0}` in vector table")]
    DuplicateToken(String),
    #[error("embedding backend `{backend}`: {message}")]
    Backend { backend: String, message: String },
    #[error("empty text")]
    EmptyText,

    #[error("paraphrase set `{0}` needs at least 2 non-empty responses")]
    TooFewParaphrases(String),
    #[error("invalid vagueness config: {0}")]
    VaguenessConfig(String),
    #[error("review queue: {0}")]
    Review(String),
    #[error("decision for `{0}` is unresolved")]
    Unresolved(String),

    #[error("invalid lexicon: {0}")]
    Lexicon(String),

    #[error("example `{id}` lacks label `{key}`")]
    MissingLabel { id: String, key: String },
    #[error("invalid split plan: {0}")]
    SplitPlan(String),
    #[error("subgroup {0} is empty")]
    EmptySubgroup(String),
    #[error("subgroup {subgroup} has {size} example(s), too few to split")]
    SubgroupTooSmall { subgroup: String, size: usize },
    #[error("stratum {stratum} has {size} example(s), fewer than k = {k}")]
    StratumTooSmall {
        stratum: String,
        size: usize,
        k: usize,
    },
    #[error("unknown id `{0}`")]
    UnknownId(String),

    #[error("training set contains a single class")]
    SingleClass,
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("train and test sets overlap on `{0}`")]
    Leakage(String),
    #[error("prediction/gold key mismatch at `{0}`")]
    KeyMismatch(String),
    #[error("unknown classifier backend `{0}`")]
    UnknownBackend(String),
    #[error("invalid train config: {0}")]
    TrainConfig(String),

    #[error("invalid synthetic corpus manifest: {0}")]
    Manifest(String),
    #[error("{0} scored id(s) missing, e.g. `{1}`")]
    Unscored(usize, String),

    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn backend(backend: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Backend {
            backend: backend.into(),
            message: message.into(),
        }
    }
}
