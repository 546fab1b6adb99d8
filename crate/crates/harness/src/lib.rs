//! Experiment orchestration for the long-wave kinetic laboratory.
//!
//! The core crate owns the numerics; this crate owns everything around
//! them: INI-style experiment configs with schema checking, the named
//! experiments (the flagship eps-sweep, its 2D2V stretch variant, the
//! Euler-Poisson residual study, the corrector identity suite, the
//! equilibrium regression), log-log rate fitting, self-contained SVG
//! figures, plain-text pass/fail reports, and the verify suites the CLI
//! exposes. Experiments parallelize over their eps lists; each writes CSV
//! series, figures, and a report into its output directory.

pub mod config;
pub mod error;
pub mod experiments;
pub mod ratefit;
pub mod report;
pub mod svg;
pub mod verify;

pub use config::{Config, ExperimentKind};
pub use error::{HarnessError, Result};
pub use report::Report;
