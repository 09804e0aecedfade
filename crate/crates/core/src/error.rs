use thiserror::Error;

/// Errors surfaced by the library. Mathematically negative answers
/// (`NotTriangularizable`, `NotJacobian`, ...) are ordinary values, not
/// errors; this enum is for violated preconditions, malformed input and
/// impossible internal states.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not a valid prime modulus")]
    InvalidField(u32),
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("variable counts do not match")]
    ArityMismatch,
    #[error("matrix dimensions do not match")]
    DimensionMismatch,
    #[error("variable index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("substitution matrix is singular")]
    SingularSubstitution,
    #[error("matrix is not nilpotent")]
    NotNilpotent,
    #[error("matrix has rank {found}, expected {expected}")]
    RankMismatch { expected: usize, found: usize },
    #[error("rank {0} is out of scope (only rank <= 2 is classified)")]
    OutOfScope(usize),
    #[error("rank {0} is too high for triangularization")]
    RankTooHigh(usize),
    #[error("polynomial degree exceeds {limit} at entry ({row}, {col})")]
    DegreeTooHigh { limit: usize, row: usize, col: usize },
    #[error("syntax error at {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },
    #[error("unknown variable x{0}")]
    UnknownVariable(usize),
    #[error("coefficient has no canonical form in this field: {0}")]
    NonCanonicalCoefficient(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    /// A fact guaranteed by the underlying theory failed to hold. This is a
    /// bug report, not an input condition; the payload reproduces the input.
    #[error("internal contradiction: {context}")]
    InternalContradiction { context: String, repro: String },
}

impl Error {
    pub fn contradiction(context: impl Into<String>, repro: impl Into<String>) -> Self {
        Error::InternalContradiction {
            context: context.into(),
            repro: repro.into(),
        }
    }
}
