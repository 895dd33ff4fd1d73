use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("operands belong to different fields")]
    MixedFields,
    #[error("division is not representable: {0}")]
    DivisionUnrepresentable(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero element where a nonzero one is required")]
    ZeroElement,
    #[error("element is not a unit at this valuation")]
    NotAUnit,
    #[error("field has infinitely many square classes")]
    InfiniteSquareClassGroup,
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("operation rejects the empty form")]
    EmptyForm,
    #[error("zero scalar")]
    ZeroScalar,
    #[error("zero entry in a quadratic form")]
    ZeroEntry,
    #[error("undecided: {0}")]
    Undecided(String),
    #[error("unsupported field: {0}")]
    UnsupportedField(String),
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("incomplete table: {0}")]
    IncompleteTable(String),
    #[error("parity mismatch: {0}")]
    ParityMismatch(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("inconsistent facts: {0}")]
    InconsistentFacts(String),
    #[error("sample is missing special places: {0}")]
    SampleMissingSpecialPlaces(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("characteristic 2 is not supported")]
    EvenCharacteristic,
    #[error("{0} is not prime")]
    CompositeP(u64),
}

impl Error {
    /// Stable machine-readable code for reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MixedFields => "MixedFields",
            Error::DivisionUnrepresentable(_) => "DivisionUnrepresentable",
            Error::DivisionByZero => "DivisionByZero",
            Error::ZeroElement => "ZeroElement",
            Error::NotAUnit => "NotAUnit",
            Error::InfiniteSquareClassGroup => "InfiniteSquareClassGroup",
            Error::ZeroPolynomial => "ZeroPolynomial",
            Error::EmptyForm => "EmptyForm",
            Error::ZeroScalar => "ZeroScalar",
            Error::ZeroEntry => "ZeroEntry",
            Error::Undecided(_) => "Undecided",
            Error::UnsupportedField(_) => "UnsupportedField",
            Error::UnsupportedShape(_) => "UnsupportedShape",
            Error::IncompleteTable(_) => "IncompleteTable",
            Error::ParityMismatch(_) => "ParityMismatch",
            Error::OutOfRange(_) => "OutOfRange",
            Error::InconsistentFacts(_) => "InconsistentFacts",
            Error::SampleMissingSpecialPlaces(_) => "SampleMissingSpecialPlaces",
            Error::Parse(_) => "ParseError",
            Error::EvenCharacteristic => "EvenCharacteristic",
            Error::CompositeP(_) => "CompositeP",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
