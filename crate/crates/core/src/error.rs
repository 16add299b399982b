use thiserror::Error;

use crate::netcomb::EdgeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degree {0} is out of range")]
    InvalidDegree(usize),

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("structural invariant violated: {0}")]
    Structural(String),

    #[error("invalid arc subset: {0}")]
    InvalidArcSubset(String),

    #[error("arc subsets do not form a decreasing chain")]
    NonNestedChain,

    #[error("invalid critical sequence: {0}")]
    InvalidSequence(String),

    #[error("unknown edge {0}")]
    UnknownEdge(String),

    #[error("edge {0} is not a closed-disk edge of this net")]
    EdgeNotInNet(EdgeId),

    #[error("zero polynomial has no roots")]
    ZeroPolynomial,

    #[error("points must be distinct: {0}")]
    CoincidentPoints(String),

    #[error("degenerate Mobius transformation")]
    DegenerateMobius,

    #[error("plane is in the degenerate locus: {0}")]
    DegeneratePlane(String),

    #[error("plane is not real")]
    NotReal,

    #[error("degree changed under transport: expected {expected}, found {found}")]
    DegreeChange { expected: usize, found: usize },

    #[error("normalization failed: {0}")]
    Normalization(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("path budget exceeded: {0} paths requested")]
    PathBudget(usize),

    #[error("trace failed: {0}")]
    Trace(String),

    #[error("labeling extraction inconsistent: {0}")]
    Extraction(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Errors caused by malformed or out-of-range input, as opposed to
    /// numerical failures on valid input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidDegree(_)
                | Error::InvalidMatching(_)
                | Error::InvalidArcSubset(_)
                | Error::NonNestedChain
                | Error::InvalidSequence(_)
                | Error::UnknownEdge(_)
                | Error::EdgeNotInNet(_)
                | Error::CoincidentPoints(_)
                | Error::InvalidProblem(_)
                | Error::PathBudget(_)
                | Error::Parse(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
