use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("ingestion error at row {row}: {reason}")]
    Ingest { row: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("partition error: {0}")]
    Partition(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("architecture mismatch between submissions")]
    ArchMismatch,

    #[error("training diverged at epoch {epoch}, batch {batch} (loss {loss})")]
    Divergence {
        epoch: usize,
        batch: usize,
        loss: f64,
    },

    /// The fairness-penalised loss needs every demographic group (and the
    /// label strata its notion conditions on) present in the local data.
    #[error("fairness loss undefined on local data: {missing}")]
    UndefinedFairnessLoss { missing: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("scoring error: {0}")]
    Scoring(String),

    #[error("selection error: {0}")]
    Selection(String),

    #[error("malformed parameter blob: {0}")]
    Blob(String),

    #[error("serialisation failed: {0}")]
    Serialization(String),

    #[error("client {client} failed in round {round}: {source}")]
    Client {
        client: usize,
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("wall-clock budget of {budget_secs}s exceeded at round {round}")]
    BudgetExceeded { budget_secs: f64, round: usize },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True when this error, or the client failure it wraps, is an
    /// [`Error::UndefinedFairnessLoss`].
    pub fn is_undefined_fairness_loss(&self) -> bool {
        match self {
            Error::UndefinedFairnessLoss { .. } => true,
            Error::Client { source, .. } => source.is_undefined_fairness_loss(),
            _ => false,
        }
    }
}
