use thiserror::Error;

/// Errors raised by every layer of the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty region: {0}")]
    EmptyRegion(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("operator is not Hermitian: {0}")]
    NonHermitian(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("numerical blow-up at t = {time}: {reason}")]
    BlowUp { time: f64, reason: String },

    #[error("configuration error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl LabError {
    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        LabError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        LabError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than a failing computation.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            LabError::InvalidParameter { .. }
                | LabError::Config { .. }
                | LabError::Hypothesis(_)
                | LabError::DimensionMismatch(_)
                | LabError::EmptyRegion(_)
        )
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Serialization(e.to_string())
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
