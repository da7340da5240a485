use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}:{line}: field `{field}`: {message}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        field: String,
        message: String,
    },

    #[error("missing condition column {0:?}")]
    MissingConditionColumn(String),

    #[error("unknown condition column {0:?}")]
    UnknownConditionColumn(String),

    #[error("duplicate study_id {0:?}")]
    DuplicateStudy(String),

    #[error("missing labels for study_id {0:?}")]
    MissingLabels(String),

    #[error("misaligned inputs: {0}")]
    Misaligned(String),

    #[error("degenerate table: every row and column marginal must be positive")]
    DegenerateTable,

    #[error("invalid condition for this operation: {0}")]
    InvalidCondition(String),

    #[error("invalid lexicon: {0}")]
    Lexicon(String),

    #[error("invalid keyword catalog: {0}")]
    Catalog(String),

    #[error("rewrite backend failed on rule {rule_id}{}: {message}", sentence_index.map(|i| format!(", sentence {i}")).unwrap_or_default())]
    Backend {
        rule_id: u8,
        sentence_index: Option<usize>,
        message: String,
    },

    #[error("generation endpoint {endpoint} failed for request {request_id}: {message}")]
    Remote {
        endpoint: String,
        request_id: String,
        message: String,
    },

    #[error("cannot build a retrieval index from an empty corpus")]
    EmptyCorpus,

    #[error("retrieval index is empty")]
    EmptyIndex,

    #[error("index was built with lexicon {found}, but the loaded lexicon is {expected}")]
    LexiconMismatch { expected: String, found: String },

    #[error("invalid generation request {study_id:?}: {message}")]
    InvalidRequest { study_id: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of an external rewriting or generation service.
    pub fn is_remote(&self) -> bool {
        matches!(self, Error::Backend { .. } | Error::Remote { .. })
    }
}
