//! Experiment drivers: each takes a checked [`Config`](crate::config::Config)
//! and an output directory, writes CSV series and SVG figures, and returns
//! a [`Report`](crate::report::Report) whose asserted lines are the
//! experiment's acceptance checks.

pub mod ep_residual;
pub mod equilibrium;
pub mod kdv_sweep;
pub mod kpii_sweep;
pub mod zk_identities;

use crate::config::{Config, ExperimentKind};
use crate::error::{HarnessError, Result};
use crate::report::Report;
use longwave_core::field::SpectralField;
use longwave_core::grid::TorusGrid;
use longwave_core::poisson::ChargeLaw;
use std::path::Path;

/// Dispatch a config to its driver.
pub fn run(cfg: &Config, out: &Path) -> Result<Report> {
    std::fs::create_dir_all(out)?;
    match cfg.kind {
        ExperimentKind::KdvSweep => kdv_sweep::run(cfg, out),
        ExperimentKind::KpiiSweep => kpii_sweep::run(cfg, out),
        ExperimentKind::EpResidual => ep_residual::run(cfg, out),
        ExperimentKind::ZkIdentities => zk_identities::run(cfg, out),
        ExperimentKind::EquilibriumRegression => equilibrium::run(cfg, out),
    }
}

/// Filename fragment for an eps value: `0.0125` becomes `0p0125`.
pub fn eps_tag(eps: f64) -> String {
    let s = format!("{eps}");
    s.replace('.', "p")
}

pub fn parse_law(s: &str) -> Result<ChargeLaw> {
    match s {
        "linearized" => Ok(ChargeLaw::Linearized),
        "boltzmann" => Ok(ChargeLaw::Boltzmann),
        other => Err(HarnessError::Config(format!(
            "unknown charge law '{other}' (expected linearized or boltzmann)"
        ))),
    }
}

/// Initial dispersive profile from the `[profile]` section on a 1D grid.
pub fn profile_1d(cfg: &Config, grid: &TorusGrid<f64>) -> Result<SpectralField<f64>> {
    let family = cfg.get_str_or("profile.family", "cosine");
    match family {
        "cosine" => {
            let amp = cfg.get_f64("profile.amplitude")?;
            let k = cfg.get_usize("profile.wavenumber")? as f64;
            Ok(SpectralField::from_fn(grid, |x: &[f64]| amp * (k * x[0]).cos()))
        }
        "flat" => Ok(SpectralField::zeros(grid)),
        other => Err(HarnessError::Config(format!(
            "unknown profile family '{other}'"
        ))),
    }
}

/// Whole number of kinetic steps covering `t_end` at `dt`, or an error
/// naming the mismatch.
pub fn whole_steps(t_end: f64, dt: f64) -> Result<usize> {
    let n = (t_end / dt).round();
    if (n * dt - t_end).abs() > 1e-9 * t_end.max(1.0) || n < 1.0 {
        return Err(HarnessError::Config(format!(
            "t_end {t_end} is not a whole number of steps of dt {dt}"
        )));
    }
    Ok(n as usize)
}
