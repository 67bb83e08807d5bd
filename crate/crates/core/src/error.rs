use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("divisor not monic-up-to-constant in x")]
    NonUnitLeading,
    #[error("kernel x^k(1-x)^s is constant for k = s = 0")]
    ConstantKernel,
    #[error("not divisible for any z: change k,s or parameterize P ({0})")]
    NotDivisible(String),
    #[error("z is undetermined: P is constant, so every z divides; supply z explicitly")]
    Undetermined,
    #[error("derived series diverges: |z| = {z} does not exceed sup x^k(1-x)^s = {bound}")]
    Diverges { z: String, bound: String },
    #[error("degenerate series: z = 0")]
    ZeroZ,
    #[error("invalid seed integral: {0}")]
    InvalidSeed(String),
    #[error("zero denominator in weight factor at n = {n}, g = {g}")]
    WeightPole { n: u64, g: usize },
    #[error("series does not converge: {0}")]
    NonConvergent(String),
    #[error("quadrature did not converge after {levels} levels (last difference {diff})")]
    QuadratureFailed { levels: u32, diff: String },
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("semantic error: {0}")]
    Semantic(String),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported reference: {0}")]
    Unsupported(String),
    #[error("invalid rational literal {0:?}")]
    BadRational(String),
    #[error("unknown identity {0:?}")]
    UnknownIdentity(String),
    #[error("malformed JSON: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
