use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("density is not positive at direction {direction:?} (value {value})")]
    NonPositiveDensity { direction: Vec<f64>, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("enumeration budget exceeded at rho = {rho}: {needed} work units > budget {budget}")]
    Budget { rho: f64, needed: u128, budget: u64 },

    #[error("frequency budget exceeded: |y| = {norm} > {limit}")]
    FrequencyBudget { norm: f64, limit: f64 },

    #[error("slabs overlap at outer index {0}")]
    OverlappingSlabs(i64),

    #[error("boundary normal undefined at vertex direction {0:?}")]
    VertexDirection(Vec<f64>),

    #[error("too few usable points for a fit: {got} (need {need})")]
    TooFewPoints { got: usize, need: usize },

    #[error("config error in {field}: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors raised because a computation would exceed its work budget.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. } | Error::FrequencyBudget { .. })
    }
}
