use thiserror::Error;

/// Errors from turning program text into an [`Expr`](crate::Expr).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown primitive `{name}` at {pos}")]
    UnknownPrimitive { pos: usize, name: String },
    #[error("primitive `{name}` at {pos} takes {expected} argument(s), got {found}")]
    ArityMismatch {
        pos: usize,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("input x{index} at {pos} exceeds arity {arity}")]
    InputOutOfRange { pos: usize, index: usize, arity: usize },
}

/// Errors raised while running a program.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("`{primitive}` applied outside its domain at {args:?}")]
    Domain { primitive: &'static str, args: Vec<f64> },
    #[error("`{primitive}` produced a non-finite value at {args:?}")]
    NonFinite { primitive: &'static str, args: Vec<f64> },
    #[error("program reads x{index} but only {arity} input(s) were given")]
    InputOutOfRange { index: usize, arity: usize },
    #[error("input vector has non-finite entry at position {0}")]
    NonFiniteInput(usize),
    #[error("expected {expected} value(s), got {found}")]
    LengthMismatch { expected: usize, found: usize },
}

/// Errors from the piecewise-representation algebra.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReprError {
    #[error("no piece contains the point {0:?}")]
    NoPiece(Vec<f64>),
    #[error("pieces {pieces:?} all contain the point {point:?}")]
    MultiplePieces { point: Vec<f64>, pieces: Vec<usize> },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("a representation needs at least one piece")]
    Empty,
}

/// Errors from the Cantor-function constructions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GalleryError {
    #[error("point {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("bisection for F(t) = {target} stalled with residual {residual:e}")]
    BisectionFailed { target: f64, residual: f64 },
    #[error("no probe found at depth {depth} for step {step}: {reason}; try a larger depth")]
    ProbeNotFound { depth: u32, step: u32, reason: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("unknown primitive `{0}`")]
pub struct UnknownPrimitive(pub String);
