use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("value {0} overflows the binary64 range")]
    FloatOverflow(String),
    #[error("cannot parse dyadic value {0:?}")]
    Parse(String),
    #[error("sign pattern has length {got}, expected {expected}")]
    PatternLength { expected: usize, got: usize },
    #[error("coordinate {0} lies outside [0, 1]")]
    CoordinateOutOfRange(String),
    #[error("point ({0}, {1}) lies outside the Haar domain [0, 1)^2")]
    OutsideHaarDomain(String, String),
    #[error("resolution {0} exceeds the supported maximum {max}", max = crate::pointsets::MAX_RESOLUTION)]
    ResolutionTooFine(u32),
    #[error("point set is empty")]
    EmptySet,
    #[error("cardinality {0} is not a power of two; exact averages would leave the dyadic ring")]
    NonDyadicCardinality(usize),
    #[error("expected {expected} points, found {got}")]
    Cardinality { expected: usize, got: usize },
    #[error("invalid Haar index: {0}")]
    InvalidIndex(String),
    #[error("inadmissible Besov parameters: {0}")]
    Inadmissible(String),
    #[error("exact L_p integral needs an even positive p, got {0}")]
    OddExponent(u32),
    #[error("point set does not live on the declared dyadic grid: {0}")]
    NotOnGrid(String),
    #[error("index shape not covered by the Davenport closed form: {0}")]
    UncoveredShape(String),
    #[error("rate fit needs at least 3 rows with nonzero error, found {0}")]
    TooFewRows(usize),
    #[error("{0}")]
    Domain(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
