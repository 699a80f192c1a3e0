use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate Gegenbauer basis: |lambda| = {lambda:e} is below {eps:e} (p near 6)")]
    DegenerateBasis { lambda: f64, eps: f64 },

    #[error("negative radicand {radicand:e} in the closed-form breaking condition at alpha={alpha}, p={p}")]
    Radicand { alpha: f64, p: f64, radicand: f64 },

    #[error("quadrature did not reach tolerance {tol:e}: estimated error {estimate:e}")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("normalization overflow at degree {degree} (lambda = {lambda})")]
    Overflow { degree: usize, lambda: f64 },

    #[error("assembled matrix is not symmetric: relative asymmetry {asymmetry:e}")]
    Build { asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error(
        "eigensolver failed to converge after {iterations} iterations (residual {residual:e})"
    )]
    Convergence { iterations: usize, residual: f64 },

    #[error("bisection bracket has equal signs: f(lo) = {lo_value:e}, f(hi) = {hi_value:e}")]
    Bracket { lo_value: f64, hi_value: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
