//! Transverse-stretched eps-sweep: 2D2V kinetic runs against the KP-II
//! description.
//!
//! Same preparation-and-march scheme as the 1D sweep, with the second
//! space direction stretched by sqrt(eps) and the Poisson operator carrying
//! the anisotropic weights. Desk-scale grids keep this to a couple of eps
//! values, so instead of a rate fit the report asserts the mechanics
//! (conservation, consistency, sign structure of the energy parts), that
//! max_t H decreases with eps, and that H/sqrt(eps) stays inside a
//! factor-5 window.

use super::{eps_tag, parse_law, whole_steps};
use crate::config::Config;
use crate::error::{HarnessError, Result};
use crate::report::Report;
use crate::svg::{self, Series};
use longwave_core::correctors::{build_kpii, CorrectorSet};
use longwave_core::dispersive::{DispersiveSolver, WaveKind};
use longwave_core::entropy::{write_entropy_csv, EntropyLog, EntropyReport};
use longwave_core::field::SpectralField;
use longwave_core::grid::TorusGrid;
use longwave_core::phasespace::{
    build_prepared_data, matched_density, velocity_extent, PhaseGrid, VelocityAxis,
};
use longwave_core::poisson::{anisotropy_weights, ChargeLaw};
use longwave_core::vlasov::{ConservationLog, ScalingModel, VlasovSolver};
use rayon::prelude::*;
use std::f64::consts::TAU;
use std::io::Write as _;
use std::path::Path;

struct Setup {
    nx1: usize,
    nx2: usize,
    nv1: usize,
    nv2: usize,
    eps: Vec<f64>,
    theta0: f64,
    t_end: f64,
    c_cfl: f64,
    law: ChargeLaw,
    stride: usize,
}

#[derive(Clone, Debug)]
struct Row {
    eps: f64,
    h0: f64,
    max_h: f64,
    final_h: f64,
    mass_drift: f64,
    final_residual: f64,
    min_part: f64,
    energy_violation: f64,
    clipped_mass: f64,
    flagged: Option<String>,
}

impl Row {
    fn failed(eps: f64, why: String) -> Self {
        Row {
            eps,
            h0: f64::NAN,
            max_h: f64::NAN,
            final_h: f64::NAN,
            mass_drift: f64::NAN,
            final_residual: f64::NAN,
            min_part: f64::NAN,
            energy_violation: f64::NAN,
            clipped_mass: f64::NAN,
            flagged: Some(why),
        }
    }
}

fn setup(cfg: &Config) -> Result<Setup> {
    Ok(Setup {
        nx1: cfg.get_usize("grid.nx1")?,
        nx2: cfg.get_usize("grid.nx2")?,
        nv1: cfg.get_usize("grid.nv1")?,
        nv2: cfg.get_usize("grid.nv2")?,
        eps: cfg.eps_list("sweep.eps_list")?,
        theta0: cfg.get_f64("sweep.theta0")?,
        t_end: cfg.get_f64("sweep.t_end")?,
        c_cfl: cfg.get_f64("sweep.c_cfl")?,
        law: parse_law(cfg.get_str("sweep.law")?)?,
        stride: cfg.get_usize("sweep.stride")?.max(1),
    })
}

fn profile_2d(cfg: &Config, grid: &TorusGrid<f64>) -> Result<SpectralField<f64>> {
    match cfg.get_str("profile.family")? {
        "cosine" => {
            let amp = cfg.get_f64("profile.amplitude")?;
            let k = cfg.get_f64("profile.wavenumber")?;
            let ta = cfg.get_f64("profile.transverse_amplitude")?;
            Ok(SpectralField::from_fn(grid, |x: &[f64]| {
                amp * (k * x[0]).cos() * (1.0 + ta * x[1].cos())
            }))
        }
        "flat" => Ok(SpectralField::zeros(grid)),
        other => Err(HarnessError::Config(format!("unknown profile.family '{other}'"))),
    }
}

fn kpii_correctors(
    grid: &TorusGrid<f64>,
    phi0: &SpectralField<f64>,
    t_end: f64,
) -> Result<CorrectorSet<f64>> {
    let dt = 1e-3;
    let steps = whole_steps(t_end.max(dt), dt)?;
    let traj = DispersiveSolver::new(WaveKind::KpII, grid)?.evolve(phi0, dt, steps, 5)?;
    Ok(build_kpii(&traj)?)
}

/// One velocity axis per direction, wide enough for the largest eps in the
/// sweep; the transverse modulated velocity is sqrt(eps)-small but the
/// thermal spread is shared.
fn velocity_grids(set: &CorrectorSet<f64>, s: &Setup) -> Result<Vec<VelocityAxis<f64>>> {
    let eps_max = s.eps[0];
    let sigma = (s.theta0 * eps_max.sqrt()).sqrt();
    let mut axes = Vec::new();
    for (axis, nv) in [(0usize, s.nv1), (1, s.nv2)] {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for sample in &set.samples {
            let u = &sample.modulated_velocity(eps_max)[axis];
            hi = hi.max(u.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max));
            lo = lo.min(u.values().iter().cloned().fold(f64::INFINITY, f64::min));
        }
        let (vmin, vmax) = velocity_extent(lo.min(0.0), hi.max(0.0), sigma);
        axes.push(VelocityAxis::new(nv, vmin, vmax)?);
    }
    Ok(axes)
}

fn run_one_eps(
    s: &Setup,
    set: &CorrectorSet<f64>,
    axes: &[VelocityAxis<f64>],
    eps: f64,
    out: &Path,
) -> Result<(Row, Vec<EntropyReport<f64>>)> {
    let space = TorusGrid::new(&[(s.nx1, TAU), (s.nx2, TAU)])?;
    let grid = PhaseGrid::new(space, axes.to_vec())?;
    let f0 = build_prepared_data(&grid, eps, set, s.theta0, s.law)?;
    let solver = VlasovSolver::new(ScalingModel::new(WaveKind::KpII, eps, s.law)?);
    let state0 = solver.initial_state(f0, 0.0)?;
    let dt = s.c_cfl * eps;
    whole_steps(s.t_end, dt).map_err(|_| {
        HarnessError::Config(format!(
            "t_end {} not commensurate with dt = c_cfl*eps = {dt}",
            s.t_end
        ))
    })?;

    let mut entropy = EntropyLog::new(set);
    let mut conservation = ConservationLog::new();
    let outcome = solver.run(state0, s.t_end, dt, s.stride, &mut [&mut entropy, &mut conservation])?;

    let tag = eps_tag(eps);
    write_entropy_csv(out.join(format!("entropy_{tag}.csv")), &entropy.reports)?;
    conservation.write_csv(out.join(format!("conservation_{tag}.csv")))?;

    let h0 = entropy.reports[0].h_total;
    let max_h = entropy.max_total().unwrap_or(f64::NAN);
    let final_h = entropy.reports.last().expect("initial report exists").h_total;
    let min_part = entropy
        .reports
        .iter()
        .map(|r| r.h_kinetic.min(r.h_grad).min(r.h_field))
        .fold(f64::INFINITY, f64::min);
    let mass_drift = conservation.reports.iter().map(|r| r.mass_drift).fold(0.0, f64::max);
    let e0 = conservation.reports[0].energy;
    let energy_violation = conservation
        .reports
        .iter()
        .map(|r| ((r.energy - e0) / e0.abs()).max(0.0))
        .fold(0.0, f64::max);
    let final_residual = solver.poisson_residual(&outcome.state)?;

    Ok((
        Row {
            eps,
            h0,
            max_h,
            final_h,
            mass_drift,
            final_residual,
            min_part,
            energy_violation,
            clipped_mass: outcome.clipped_mass,
            flagged: None,
        },
        entropy.reports,
    ))
}

pub fn run(cfg: &Config, out: &Path) -> Result<Report> {
    let s = setup(cfg)?;
    let space = TorusGrid::new(&[(s.nx1, TAU), (s.nx2, TAU)])?;
    let phi0 = profile_2d(cfg, &space)?;
    let set = kpii_correctors(&space, &phi0, s.t_end)?;
    let axes = velocity_grids(&set, &s)?;

    for &eps in &s.eps {
        let phi_t = set.samples[0].target_potential(eps);
        let rho = matched_density(&phi_t, eps, &anisotropy_weights(WaveKind::KpII, eps), s.law)?;
        if rho.min_value() <= 0.0 {
            return Err(HarnessError::Config(format!(
                "profile amplitude drives the matched density nonpositive at eps {eps}"
            )));
        }
    }

    let results: Vec<(Row, Vec<EntropyReport<f64>>)> = s
        .eps
        .par_iter()
        .map(|&eps| {
            run_one_eps(&s, &set, &axes, eps, out)
                .unwrap_or_else(|e| (Row::failed(eps, e.to_string()), Vec::new()))
        })
        .collect();
    let (rows, entropy_series): (Vec<Row>, Vec<Vec<EntropyReport<f64>>>) =
        results.into_iter().unzip();

    let mut w = std::io::BufWriter::new(std::fs::File::create(out.join("summary.csv"))?);
    writeln!(
        w,
        "eps,h0,max_h,final_h,max_h_over_sqrt_eps,mass_drift,final_poisson_residual,\
         min_entropy_part,energy_violation,clipped_mass,flagged"
    )?;
    for r in &rows {
        writeln!(
            w,
            "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
            r.eps,
            r.h0,
            r.max_h,
            r.final_h,
            r.max_h / r.eps.sqrt(),
            r.mass_drift,
            r.final_residual,
            r.min_part,
            r.energy_violation,
            r.clipped_mass,
            r.flagged.as_deref().unwrap_or("")
        )?;
    }
    drop(w);

    let mut report = Report::new("kpii_sweep");
    for r in &rows {
        if let Some(why) = &r.flagged {
            report.check(format!("eps {} completed", r.eps), false, why.clone());
        }
    }
    let clean: Vec<&Row> = rows.iter().filter(|r| r.flagged.is_none()).collect();

    let worst_mass = clean.iter().map(|r| r.mass_drift).fold(0.0, f64::max);
    report.check(
        "mass drift",
        worst_mass < 1e-9,
        format!("max relative drift {worst_mass:.3e} (need < 1e-9)"),
    );
    let worst_res = clean.iter().map(|r| r.final_residual).fold(0.0, f64::max);
    report.check(
        "stored potential consistency",
        worst_res < 1e-10,
        format!("max Poisson residual {worst_res:.3e} (need < 1e-10)"),
    );
    let worst_part = clean.iter().map(|r| r.min_part).fold(f64::INFINITY, f64::min);
    report.check(
        "entropy parts nonnegative",
        worst_part > -1e-12,
        format!("min part {worst_part:.3e} (need > -1e-12)"),
    );
    let worst_violation = clean.iter().map(|r| r.energy_violation).fold(0.0, f64::max);
    report.check(
        "energy increase bound",
        worst_violation < 1e-4,
        format!("max relative increase {worst_violation:.3e} (need < 1e-4)"),
    );
    let explosive = clean.iter().any(|r| !(r.max_h < 1e3 * r.h0));
    report.check("non-explosive time series", !explosive, "max_t H < 1e3 H(0) for all eps");

    if clean.len() >= 2 {
        let decreasing = clean.windows(2).all(|w| w[1].max_h < w[0].max_h);
        report.check(
            "max_t H decreasing in eps",
            decreasing,
            clean.iter().map(|r| format!("{:.3e}", r.max_h)).collect::<Vec<_>>().join(" -> "),
        );
        let ratios: Vec<f64> = clean.iter().map(|r| r.max_h / r.eps.sqrt()).collect();
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        report.check(
            "sqrt-eps window (max_t H / sqrt eps)",
            hi / lo <= 5.0,
            format!("spread factor {:.3} over {ratios:.3?} (need <= 5)", hi / lo),
        );
    } else {
        report.info("eps comparison", "fewer than two completed eps, decrease check skipped");
    }
    let worst_clip = clean.iter().map(|r| r.clipped_mass).fold(0.0, f64::max);
    report.info("clipped mass", format!("max over sweep {worst_clip:.3e}"));

    let traces: Vec<Series> = rows
        .iter()
        .zip(&entropy_series)
        .filter(|(_, reps)| !reps.is_empty())
        .map(|(row, reps)| Series {
            label: format!("eps {}", row.eps),
            points: reps.iter().map(|r| (r.t, r.h_total)).collect(),
            dashed: false,
            markers: false,
        })
        .collect();
    if !traces.is_empty() {
        svg::write_linear(out.join("traces_entropy.svg"), "H(t) per eps", "t", "H", &traces)?;
    }

    report.write(out.join("report.txt"))?;
    Ok(report)
}
