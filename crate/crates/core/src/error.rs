use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a supported prime")]
    NotPrime(u64),
    #[error("invalid field data: {0}")]
    InvalidField(String),
    #[error("polynomial is not Eisenstein: {0}")]
    NotEisenstein(String),
    #[error("precision {given} is below the minimum {minimum}")]
    PrecisionTooLow { given: i64, minimum: i64 },
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("division by an element that is zero to precision")]
    DivisionByZero,
    #[error("polynomial is reducible")]
    Reducible,
    #[error("elements belong to different fields")]
    FieldMismatch,
    #[error("the field does not contain the p-th roots of unity")]
    MuPNotContained,
    #[error("bad filtration level: {0}")]
    BadLevel(String),
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("unsupported reduction: {0}")]
    UnsupportedReduction(String),
    #[error("kernel not found: {0}")]
    KernelNotFound(String),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("series order too low: {0}")]
    OrderTooLow(String),
    #[error("degenerate pairing: {0}")]
    DegeneratePairing(String),
    #[error("not integral: {0}")]
    NotIntegral(String),
    #[error("singular curve")]
    Singular,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },
}

impl Error {
    /// Stable machine-readable tag used in JSON reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "NotPrime",
            Error::InvalidField(_) => "InvalidField",
            Error::NotEisenstein(_) => "NotEisenstein",
            Error::PrecisionTooLow { .. } => "PrecisionTooLow",
            Error::PrecisionExhausted(_) => "PrecisionExhausted",
            Error::DivisionByZero => "DivisionByZero",
            Error::Reducible => "Reducible",
            Error::FieldMismatch => "FieldMismatch",
            Error::MuPNotContained => "MuPNotContained",
            Error::BadLevel(_) => "BadLevel",
            Error::HypothesisFailed(_) => "HypothesisFailed",
            Error::UnsupportedReduction(_) => "UnsupportedReduction",
            Error::KernelNotFound(_) => "KernelNotFound",
            Error::CapExceeded(_) => "CapExceeded",
            Error::BudgetExhausted(_) => "BudgetExhausted",
            Error::OrderTooLow(_) => "OrderTooLow",
            Error::DegeneratePairing(_) => "DegeneratePairing",
            Error::NotIntegral(_) => "NotIntegral",
            Error::Singular => "Singular",
            Error::Unsupported(_) => "Unsupported",
            Error::Parse { .. } => "Parse",
        }
    }

    pub fn is_precision(&self) -> bool {
        matches!(self, Error::PrecisionExhausted(_) | Error::DivisionByZero)
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn exhausted(what: impl Into<String>) -> Error {
    Error::PrecisionExhausted(what.into())
}
