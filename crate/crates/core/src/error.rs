use thiserror::Error;

/// Errors raised across the workbench.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("base matrix is empty or ragged")]
    MalformedMatrix,
    #[error("punctured column count {h0} must satisfy 0 < h0 < {cols}")]
    BadPuncturedSplit { h0: usize, cols: usize },
    #[error("row {0} of the base matrix has no edges")]
    ZeroRow(usize),
    #[error("column {0} of the base matrix has no edges")]
    ZeroColumn(usize),
    #[error("right part of the base matrix is {rows}x{cols}, expected square")]
    NonSquareRightPart { rows: usize, cols: usize },
    #[error("entry ({row},{col}) = {value} exceeds the cap {cap}")]
    EntryCapExceeded {
        row: usize,
        col: usize,
        value: u32,
        cap: u32,
    },
    #[error("lifting factor {lift} cannot host {multiplicity} parallel edges")]
    LiftTooSmall { lift: usize, multiplicity: u32 },
    #[error("no invertible H2 found after {attempts} attempts")]
    SingularH2 { attempts: usize },
    #[error("code has a singular H2 and cannot encode")]
    NotEncodable,
    #[error("invalid matcher configuration: h={h}, k={k}")]
    BadComposition { h: usize, k: usize },
    #[error("message index out of range")]
    IndexOutOfRange,
    #[error("word has weight {found}, expected {expected}")]
    CompositionMismatch { expected: usize, found: usize },
    #[error("word length {found} does not match {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("rate {0} outside (0, 1) or beyond the capacity cap")]
    RateOutOfRange(f64),
    #[error("no convergence found within [{lo_db}, {hi_db}] dB")]
    NoConvergenceInBracket { lo_db: f64, hi_db: f64 },
    #[error("weight enumerator needs {needed} terms, cap is {cap}")]
    ComplexityCap { needed: u128, cap: u128 },
    #[error("growth-rate solver diverged (best residual {residual:e})")]
    SolverDiverged { residual: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{context}: {message}")]
    Io { context: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(context: impl Into<String>, err: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            message: err.to_string(),
        }
    }
}
