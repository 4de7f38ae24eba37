use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),

    #[error("degenerate triangle {triangle}: signed area {area:e}")]
    DegenerateTriangle { triangle: usize, area: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh file: {0}")]
    MeshFormat(String),

    #[error("requested {nev} eigenpairs but the problem has dimension {n}")]
    TooManyEigenpairs { nev: usize, n: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps (residuals {residuals:?})")]
    NoConvergence { sweeps: usize, residuals: Vec<f64> },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("zero-norm field")]
    ZeroNorm,

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("rank-deficient recovery patch at node {0}")]
    RankDeficientPatch(usize),

    #[error("quantity `{0}` is not available")]
    MissingQuantity(String),

    #[error("estimator `{estimator}` does not belong to eigenvalue `{base}`")]
    TagMismatch { base: String, estimator: String },

    #[error("combination weights have zero denominator")]
    ZeroDenominator,

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
