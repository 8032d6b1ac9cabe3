use thiserror::Error;

/// Errors produced by the audit kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuditError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate interval: lower limit {lcl} is not below upper limit {ucl}")]
    DegenerateInterval { lcl: f64, ucl: f64 },

    #[error("ratio-scale value must be positive, got {name} = {value}")]
    RatioDomain { name: &'static str, value: f64 },

    #[error("schema error: missing column `{0}`")]
    MissingColumn(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("study `{study_id}`: {source}")]
    Record {
        study_id: String,
        #[source]
        source: Box<AuditError>,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("indeterminate form: {0}")]
    Indeterminate(String),

    #[error("csv error: {0}")]
    Csv(String),
}

impl From<csv::Error> for AuditError {
    fn from(err: csv::Error) -> Self {
        AuditError::Csv(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, AuditError>;
