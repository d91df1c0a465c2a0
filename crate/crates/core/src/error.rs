use thiserror::Error;

/// Errors produced by the profile solvers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not reach tolerance {tol:e}, achieved estimate {achieved:e}")]
    Accuracy { tol: f64, achieved: f64 },

    #[error("unsupported far-field order {0} (at most 2 corrections are implemented)")]
    UnsupportedOrder(usize),

    #[error("fixed-point iteration diverged after {sweeps} sweeps (sup-norm {norm:e})")]
    ContractionFailure { sweeps: usize, norm: f64 },

    #[error("solution escaped (|Q| > {bound:e}) at xi = {xi}")]
    Escape { xi: f64, bound: f64 },

    #[error("step size underflow at xi = {xi} (h = {h:e})")]
    Stiffness { xi: f64, h: f64 },

    #[error("xi = {xi} outside the trajectory range [{lo}, {hi}]")]
    Range { xi: f64, lo: f64, hi: f64 },

    #[error("Newton iteration diverged after {iterations} iterations at ({x0}, {x1}), |f| = {residual:e}")]
    Divergence {
        iterations: usize,
        x0: f64,
        x1: f64,
        residual: f64,
    },

    #[error("singular Jacobian at ({x0}, {x1})")]
    Degenerate { x0: f64, x1: f64 },

    #[error("unreliable degree: min |f| = {min_abs:e} on the boundary")]
    UnreliableDegree { min_abs: f64 },

    #[error("boundary crosses an escape region near ({x0}, {x1})")]
    ExcludedRegion { x0: f64, x1: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("continuation stalled at s = {arclength} after {points} points")]
    Stall { arclength: f64, points: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("grid under-resolved: {0}")]
    Resolution(String),

    #[error("QR iteration did not converge after {0} sweeps")]
    Convergence(usize),

    #[error("symmetry doublet not found: {0}")]
    DoubletNotFound(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
