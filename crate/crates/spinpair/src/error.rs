use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid state index pair ({0}, {1}): need distinct indices in 1..=4")]
    InvalidIndex(usize, usize),
    #[error("basis mismatch between operands")]
    BasisMismatch,
    #[error("operator has zero norm")]
    ZeroNorm,
    #[error("operator is not hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("sequence contains a z-filter; use evolve instead of sequence_propagator")]
    NonUnitarySequence,
    #[error("phase cycle lists differ in length ({0}, {1}, {2})")]
    CycleLengthMismatch(usize, usize, usize),
    #[error("invalid symmetry-number combination N={n_big}, n={n}, nu={nu}")]
    InvalidSymmetry { n_big: i64, n: i64, nu: i64 },
    #[error("unsupported truncation: {0}")]
    UnsupportedTruncation(String),
    #[error("matrix logarithm undefined: eigenphase at the branch cut")]
    LogBranchCut,
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
