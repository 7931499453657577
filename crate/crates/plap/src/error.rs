use thiserror::Error;

use crate::limits::ExhaustionReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("grid too coarse: n = {n}, need at least {min}")]
    TooCoarse { n: usize, min: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field has a negative entry at node {node} ({value:e})")]
    NegativeValue { node: usize, value: f64 },

    #[error("field is not finite at node {node}")]
    NonFinite { node: usize },

    #[error("field has zero L^p norm")]
    ZeroNorm,

    #[error("test function does not vanish on the boundary (node {node})")]
    NotCompactlySupported { node: usize },

    #[error("tabulated potential has {got} samples, grid has {expected} nodes")]
    TabulatedMismatch { got: usize, expected: usize },

    #[error("solver did not converge after {iters} iterations (value {value:.12e}, residual {residual:.3e})")]
    NotConverged { iters: usize, value: f64, residual: f64 },

    #[error("solution lost positivity: min interior value {min:e} at node {node}")]
    Positivity { node: usize, min: f64 },

    #[error("shift {lambda} is not below the principal eigenvalue {principal}; problem is not coercive")]
    Coercivity { lambda: f64, principal: f64 },

    #[error("exhaustion schedule is not strictly nested: {0}")]
    NotNested(String),

    #[error("exhaustion eigenvalues are not monotone beyond tolerance")]
    NonMonotone(Box<ExhaustionReport>),

    #[error("bracket [{lo}, {hi}] does not straddle zero (values {f_lo}, {f_hi})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
