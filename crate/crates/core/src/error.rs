use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("invalid variable set: {0}")]
    InvalidVarSet(String),

    #[error("variable sets differ: [{left}] vs [{right}]")]
    VarSetMismatch { left: String, right: String },

    #[error("no image given for variable `{0}`")]
    MissingImage(String),

    #[error("zero polynomial has no top homogeneous component")]
    ZeroPolynomial,

    #[error("weight vector has length {got}, expected {expected}")]
    WeightLength { expected: usize, got: usize },

    #[error("invalid ring presentation: {0}")]
    InvalidRing(String),

    #[error("elements belong to different rings")]
    RingMismatch,

    #[error("basis monomial violates the normal-form constraints: {0}")]
    BasisConstraint(String),

    #[error("derivation is not well defined: {0}")]
    IllDefinedDerivation(String),

    #[error("nilpotency not reached within {bound} iterations")]
    BoundExceeded { bound: u64 },

    #[error("division by {divisor} is not exact: {context}")]
    InexactDivision { divisor: String, context: String },

    #[error("invalid automorphism parameters: {0}")]
    InvalidAutParams(String),

    #[error("invalid cylinder step: {0}")]
    InvalidStep(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
