use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("constraint `{label}` evaluated to a non-finite value ({value})")]
    NonFiniteConstraint { label: String, value: f64 },

    #[error("objective evaluation failed: {0}")]
    Objective(String),

    #[error("evaluation failed at generation {generation} for design {design:?}: {source}")]
    Evaluation {
        generation: usize,
        design: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("dataset is missing required column `{0}`")]
    MissingColumn(String),

    #[error("dataset contains no usable rows")]
    EmptyDataset,

    #[error("grid of {size} candidates exceeds the cap of {cap}")]
    GridTooLarge { size: u128, cap: u128 },

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
