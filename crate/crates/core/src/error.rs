use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not an odd prime in (2, 2^31)")]
    InvalidModulus(u64),
    #[error("domain mismatch: expected {expected:?}, found {found:?}")]
    DomainMismatch {
        expected: crate::fp_arith::Domain,
        found: crate::fp_arith::Domain,
    },
    #[error("{0} is not invertible")]
    NotInvertible(u64),
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("arity mismatch: expected {expected} variables, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("exponent lane overflow")]
    LaneOverflow,
    #[error("corrupt monomial key: {0}")]
    CorruptKey(String),
    #[error("monomial division by a non-divisor")]
    NotDivisible,
    #[error("invalid ring: {0}")]
    InvalidRing(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown variable `{name}` at byte {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("system file line {line}: {msg}")]
    SystemFile { line: usize, msg: String },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("key {0} missing from dictionary")]
    MissingKey(String),

    #[error("target {target} cannot be covered by admissible candidates")]
    UncoverableTarget { target: usize },
    #[error("dictionary exceeded {0} entries during closure")]
    DictionaryCap(usize),
    #[error("internal defect: {0}")]
    Defect(String),

    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("dense elimination limited to 512x512, got {rows}x{cols}")]
    DenseCap { rows: usize, cols: usize },
    #[error("probabilistic failure after {attempts} attempts (seeds {seeds:?})")]
    ProbabilisticFailure { attempts: usize, seeds: Vec<u64> },

    #[error("zero polynomial where a nonzero one is required")]
    ZeroPolynomial,
    #[error("empty critical pair queue")]
    EmptyQueue,
    #[error("step cap of {0} reached")]
    StepCap(usize),

    #[error("property violation: {0}")]
    PropertyViolation(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
