use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}: {message}")]
    InvalidRow { row: usize, message: String },

    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),

    #[error("empty vocabulary after tokenization")]
    EmptyVocabulary,

    #[error("target dimension {requested} exceeds achievable rank {rank}")]
    RankTooLow { requested: usize, rank: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid interaction batch: {0}")]
    InvalidBatch(String),

    #[error("normal matrix is singular; use ridge_lambda > 0")]
    SingularNormalMatrix,

    #[error("unsupported snapshot format version {found} (expected {expected})")]
    SnapshotVersion { found: u32, expected: u32 },

    #[error("no layout for iteration {requested}; latest is {latest}")]
    UnknownIteration { requested: u64, latest: u64 },

    #[error("session is busy training")]
    Busy,

    #[error("no interactions queued")]
    NothingQueued,

    #[error("update failed: {0}")]
    UpdateFailed(String),
}
