use thiserror::Error;

use crate::padic::PadicError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("enumeration of {count} configurations exceeds the cap")]
    EnumerationTooLarge { count: String },
    #[error("partition function vanishes at the working precision")]
    DegeneratePartitionFunction,
    #[error("recursion denominator vanishes")]
    SingularRecursion,
    #[error("field does not solve the recursion at vertex {vertex}")]
    NotARecursionSolution { vertex: String },
    #[error("pole of the map hit at {pole}")]
    PoleEncountered { pole: String },
    #[error("point is not a fixed point at the working precision")]
    NotAFixedPoint,
    #[error("parameters are outside the regime: {0}")]
    RegimeMismatch(String),
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error("measure {0} is undefined: the fixed point does not exist")]
    MeasureUndefined(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
