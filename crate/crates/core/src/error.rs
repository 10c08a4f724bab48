use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not a supported prime")]
    InvalidModulus(u64),
    #[error("operands belong to different fields (q = {0} vs q = {1})")]
    MismatchedField(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("duplicate evaluation point")]
    DuplicatePoint,
    #[error("not enough points: need {needed}, got {got}")]
    NotEnoughPoints { needed: usize, got: usize },
    #[error("supplied points do not lie on a single polynomial of the requested degree")]
    InconsistentPoints,
    #[error("threshold {t} out of range for {n} parties")]
    ThresholdOutOfRange { t: usize, n: usize },
    #[error("field of order {q} is too small for {n} parties (need q >= n + 1)")]
    FieldTooSmall { q: u64, n: usize },
    #[error("not enough shares: need {needed}, got {got}")]
    NotEnoughShares { needed: usize, got: usize },
    #[error("shares are inconsistent with a single sharing polynomial")]
    InconsistentShares,
    #[error("duplicate or out-of-range share index {0}")]
    InvalidShareIndex(u16),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot sample {requested} linearly independent keys in dimension {dim}")]
    TooManyKeys { requested: usize, dim: usize },
    #[error("PRF keys are not linearly independent")]
    DependentKeys,
    #[error("parameter violation: {0}")]
    ParamViolation(String),
    #[error("bit-length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid share set: {0}")]
    ShareSetInvalid(String),
    #[error("group of order {0} is too small")]
    GroupTooSmall(u64),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("polynomial degree {degree} exceeds bound {bound}")]
    DegreeTooHigh { degree: usize, bound: usize },
    #[error("invalid party index {0}")]
    InvalidPartyIndex(usize),
    #[error("invalid bit string: {0}")]
    InvalidBits(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("exact enumeration needs {states} states, above the bound of {bound}")]
    InfeasibleEnumeration { states: u128, bound: u128 },
    #[error("view selector out of range: {0}")]
    SelectorOutOfRange(String),
    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
