use thiserror::Error;

/// Errors raised by operator construction and spectral analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter outside open unit disk: |a| = {modulus}")]
    OutsideDisk { modulus: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("basis mismatch between operands")]
    BasisMismatch,

    #[error("dimension {got} too small, need at least {min}")]
    DimensionTooSmall { got: usize, min: usize },

    #[error("symbol has half-width {have}, need {need} (tail not negligible)")]
    InsufficientSymbol { have: usize, need: usize },

    #[error(
        "rank loss while orthonormalizing column {column} (relative norm {relative_norm:.3e})"
    )]
    RankLoss { column: usize, relative_norm: f64 },

    #[error("matrix is not Hermitian: relative residual {residual:.3e}")]
    NotHermitian { residual: f64 },

    #[error("near-singular matrix: smallest eigenvalue {min_eig:.3e}")]
    NearSingular { min_eig: f64 },

    #[error("ill-separated spectral cluster at {value:.3e}; increase the truncation dimension")]
    IllSeparated { value: f64 },

    #[error("eigensolver did not converge")]
    EigenFailure,

    #[error("zero projection")]
    ZeroProjection,

    #[error("word is not Hermitian")]
    NonHermitianWord,

    #[error("model grids differ")]
    GridMismatch,

    #[error("cannot parse word: {0}")]
    WordParse(String),

    #[error("unknown identity: {0}")]
    UnknownIdentity(String),

    #[error("at N = {dim}: {source}")]
    AtDimension { dim: usize, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;
