//! Error type shared by all modules. Numerical failure modes are explicit:
//! nothing is silently clamped, broadcast, or renormalized.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("{what} is not finite")]
    NonFinite { what: String },

    #[error("antiderivative obstruction on axis {axis}: |line mean| = {magnitude:.3e} exceeds tolerance {tol:.3e}")]
    MeanObstruction { axis: usize, magnitude: f64, tol: f64 },

    #[error("time step {dt:.6e} exceeds stability cap {cap:.6e}")]
    StepTooLarge { dt: f64, cap: f64 },

    #[error("characteristic foot leaves the velocity grid by {cells:.2} cells on velocity axis {axis}")]
    FootLeftGrid { axis: usize, cells: f64 },

    #[error("nonlinear solve stalled: residual {residual:.3e} after {iters} iterations (target {target:.3e})")]
    NoConvergence { iters: usize, residual: f64, target: f64 },

    #[error("non-positive density: min rho = {min_rho:.6e}")]
    NonPositiveDensity { min_rho: f64 },

    #[error("blow-up detected at t = {t:.6}: max amplitude {max:.3e} exceeds {cap:.3e}")]
    BlowUp { t: f64, max: f64, cap: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
