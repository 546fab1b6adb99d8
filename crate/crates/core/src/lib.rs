//! Numerical laboratory for long-wave scaling limits of kinetic and fluid
//! plasma models on the torus.
//!
//! The crate provides, on periodic grids of one to three space dimensions:
//! spectral calculus, screened-Poisson solvers (linearized and exponential
//! laws), a split semi-Lagrangian kinetic solver in rescaled long-wave
//! variables, pseudospectral integrators for the limiting dispersive
//! equations (KdV, KP-II, ZK), corrector-field construction for the formal
//! expansions connecting the two levels, and the modulated energy
//! ("relative entropy") functionals that quantify the distance between a
//! kinetic solution and its dispersive description.
//!
//! Everything numerical is generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); the aliases below pin the default `f64` precision used
//! by the shipped experiment configurations.

pub mod error;
pub mod scalar;
pub mod grid;
pub mod fft;
pub mod field;
pub mod spectral;
pub mod poisson;
pub mod dispersive;
pub mod correctors;
pub mod spline;
pub mod phasespace;
pub mod vlasov;
pub mod entropy;
pub mod io;

pub use error::{CoreError, Result};
pub use scalar::Real;

/// Default-precision aliases. The tolerances quoted in the module contracts
/// assume these.
pub type Grid = grid::TorusGrid<f64>;
pub type Field = field::SpectralField<f64>;
pub type Spectrum = field::Spectrum<f64>;
