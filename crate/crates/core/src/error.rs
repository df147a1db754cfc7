use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value space: {0}")]
    InvalidSpace(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid probability: {0}")]
    InvalidProbability(String),

    #[error("row {row} ({label}) is not stochastic: sums to {sum}")]
    NotStochastic { row: usize, label: String, sum: f64 },

    #[error("cause class {class} ({label}) has zero marginal mass")]
    DegenerateClass { class: usize, label: String },

    #[error("expected a {expected} CPT, got a {found} one")]
    Kind {
        expected: &'static str,
        found: &'static str,
    },

    #[error("cause value {value} has zero marginal probability")]
    ZeroMarginal { value: String },

    #[error("effect coding: {0}")]
    Coding(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("cause cluster {cluster} has {available} neighbours available, knn_k = {needed}")]
    UndersizedCluster {
        cluster: String,
        available: usize,
        needed: usize,
    },

    #[error("input: {0}")]
    Input(String),

    #[error("utility coverage: unobserved (cause, effect) pairs {}", format_pairs(.missing))]
    Coverage { missing: Vec<(String, String)> },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("solver: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by invalid input or configuration, as opposed to I/O failures.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

fn format_pairs(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(c, e)| format!("({c}, {e})"))
        .collect::<Vec<_>>()
        .join(", ")
}
