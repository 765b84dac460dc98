use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar field or map produced NaN/Inf while being evaluated.
    #[error("non-finite evaluation of {field} at {coordinate}")]
    Evaluation { field: String, coordinate: String },

    /// A drift, kick or composed map left the finite range.
    #[error("non-finite state: {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown scheme `{name}`; available: {}", available.join(", "))]
    Catalog { name: String, available: Vec<String> },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

impl Error {
    /// Prefixes a location (stage, step, branch) onto a non-finite error.
    pub(crate) fn at(self, location: impl std::fmt::Display) -> Self {
        match self {
            Error::NonFinite(msg) => Error::NonFinite(format!("{location}: {msg}")),
            Error::Evaluation { field, coordinate } => Error::Evaluation {
                field,
                coordinate: format!("{coordinate} ({location})"),
            },
            other => other,
        }
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite(_) | Error::Evaluation { .. })
    }

    /// Short stable tag for tables and logs.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Evaluation { .. } => "evaluation",
            Error::NonFinite(_) => "non-finite",
            Error::Parameter(_) => "parameter",
            Error::Precondition(_) => "precondition",
            Error::Catalog { .. } => "catalog",
            Error::Configuration(_) => "configuration",
            Error::Argument(_) => "argument",
            Error::Dimension { .. } => "dimension",
        }
    }
}
