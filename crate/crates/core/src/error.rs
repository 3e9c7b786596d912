use thiserror::Error;

/// Errors surfaced by the engine. Ingestion anomalies (unparseable referrals,
/// late events, regressing share counters) are counted in diagnostics instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid event: {0}")]
    InvalidEvent(String),

    #[error("malformed event line {line}: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("series for {article_id} covers {covered_minutes} min, need {required_minutes} min")]
    InsufficientCoverage {
        article_id: String,
        covered_minutes: i64,
        required_minutes: i64,
    },

    #[error("shelf-life undefined for {0}: no visits within the horizon")]
    ShelfLifeUndefined(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("cutoff precedes the first visit of {0}")]
    CutoffBeforeFirstVisit(String),

    #[error("article {article_id} is {age_minutes} min old, smallest horizon is {smallest_horizon} min")]
    TooEarly {
        article_id: String,
        age_minutes: i64,
        smallest_horizon: u32,
    },

    #[error("unknown article {0}")]
    UnknownArticle(String),

    #[error("no model for group {group} at horizon {horizon} min")]
    NoModel { group: String, horizon: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
