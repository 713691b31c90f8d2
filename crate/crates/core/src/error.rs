//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("degenerate interface geometry: {0}")]
    DegenerateGeometry(String),

    #[error("field has uniform sign, no zero contour to extract")]
    NoInterface,

    #[error("linear solver stalled: residual {residual:.3e} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("boundary-energy ratio {r_gamma} is at or below the wetting limit 1/2")]
    WettingLimit { r_gamma: f64 },

    #[error("argument outside the valid domain: {0}")]
    Domain(String),

    #[error("degenerate angle configuration: {0}")]
    DegenerateAngles(String),

    #[error("no junction found: {0}")]
    NoJunction(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
