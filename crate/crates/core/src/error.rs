use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("line {line}: not a strict complete order ({detail})")]
    NotStrictOrder { line: usize, detail: String },

    #[error("polar singularity at ({birth}, {death})")]
    PolarSingularity { birth: f64, death: f64 },

    #[error("essential class has no polar form")]
    EssentialNoPolar,

    #[error("gradient undefined at zero distance")]
    GradientUndefined,

    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),

    #[error("diagrams mix homology dimensions {0} and {1}")]
    MixedDimensions(usize, usize),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("entropy undefined for a diagram without positive persistence")]
    EntropyUndefined,

    #[error("brute-force matching limited to {limit} points, got {got}")]
    OracleTooLarge { limit: usize, got: usize },

    #[error("subset out of range: {0}")]
    SubsetOutOfRange(String),

    #[error("experiment spec: {0}")]
    Spec(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn param(message: impl Into<String>) -> Self {
        Error::Parameter(message.into())
    }

    /// Whether the failure comes from the data rather than from usage or IO.
    pub fn is_data_error(&self) -> bool {
        !matches!(
            self,
            Error::Io { .. } | Error::Parameter(_) | Error::Spec(_)
        )
    }
}
