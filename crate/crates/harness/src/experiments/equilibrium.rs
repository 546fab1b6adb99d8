//! Decoupled-equilibrium regression: amplitude-zero preparation.
//!
//! With a flat profile the prepared data is a uniform Maxwellian whose
//! modulated energy is pure kinetic, `H = (theta0/2) sqrt(eps) mass`. The
//! field vanishes, every advection shift is zero, and the state must sit
//! still: H(t) flat to 1e-6 relative and the eps-slope of H pinned at 1/2
//! by construction. Any drift here is solver noise, not physics.

use super::{eps_tag, parse_law, whole_steps};
use crate::config::Config;
use crate::error::Result;
use crate::ratefit::fit_rate;
use crate::report::Report;
use crate::svg::{self, Series};
use longwave_core::correctors::{build_kdv, CorrectorSet};
use longwave_core::dispersive::{DispersiveSolver, WaveKind};
use longwave_core::entropy::{write_entropy_csv, EntropyLog};
use longwave_core::field::SpectralField;
use longwave_core::grid::TorusGrid;
use longwave_core::phasespace::{build_prepared_data, velocity_extent, PhaseGrid, VelocityAxis};
use longwave_core::vlasov::{ScalingModel, VlasovSolver};
use rayon::prelude::*;
use std::io::Write as _;
use std::path::Path;

/// The zero profile solves the dispersive equation exactly for any dt, so
/// two samples bracket the horizon.
fn flat_correctors(nx: usize, t_end: f64) -> Result<CorrectorSet<f64>> {
    let grid = TorusGrid::line_2pi(nx)?;
    let zero = SpectralField::zeros(&grid);
    let traj = DispersiveSolver::new(WaveKind::Kdv, &grid)?.evolve(&zero, t_end, 1, 1)?;
    Ok(build_kdv(&traj)?)
}

pub fn run(cfg: &Config, out: &Path) -> Result<Report> {
    let nx = cfg.get_usize("grid.nx")?;
    let nv = cfg.get_usize("grid.nv")?;
    let eps_list = cfg.eps_list("sweep.eps_list")?;
    let theta0 = cfg.get_f64("sweep.theta0")?;
    let t_end = cfg.get_f64("sweep.t_end")?;
    let c_cfl = cfg.get_f64("sweep.c_cfl")?;
    let law = parse_law(cfg.get_str("sweep.law")?)?;
    let stride = cfg.get_usize("sweep.stride")?.max(1);

    let set = flat_correctors(nx, t_end)?;
    let sigma = (theta0 * eps_list[0].sqrt()).sqrt();
    let (vmin, vmax) = velocity_extent(0.0, 0.0, sigma);

    let per_eps: Vec<Result<(f64, f64, f64)>> = eps_list
        .par_iter()
        .map(|&eps| {
            let space = TorusGrid::line_2pi(nx)?;
            let grid = PhaseGrid::new(space, vec![VelocityAxis::new(nv, vmin, vmax)?])?;
            let f0 = build_prepared_data(&grid, eps, &set, theta0, law)?;
            let solver = VlasovSolver::new(ScalingModel::new(WaveKind::Kdv, eps, law)?);
            let state0 = solver.initial_state(f0, 0.0)?;
            let dt = c_cfl * eps;
            whole_steps(t_end, dt)?;
            let mut entropy = EntropyLog::new(&set);
            solver.run(state0, t_end, dt, stride, &mut [&mut entropy])?;
            write_entropy_csv(out.join(format!("entropy_{}.csv", eps_tag(eps))), &entropy.reports)?;
            let h0 = entropy.reports[0].h_total;
            let drift = entropy
                .reports
                .iter()
                .map(|r| ((r.h_total - h0) / h0).abs())
                .fold(0.0, f64::max);
            let max_h = entropy.max_total().unwrap();
            Ok((eps, max_h, drift))
        })
        .collect();

    let mut report = Report::new("equilibrium_regression");
    let mut rows = Vec::new();
    for r in per_eps {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => report.check("eps completed", false, e.to_string()),
        }
    }

    let mut w = std::io::BufWriter::new(std::fs::File::create(out.join("summary.csv"))?);
    writeln!(w, "eps,max_h,relative_drift")?;
    for (eps, max_h, drift) in &rows {
        writeln!(w, "{eps},{max_h:.12e},{drift:.12e}")?;
    }
    drop(w);

    let worst_drift = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    report.check(
        "entropy flat in time at equilibrium",
        worst_drift < 1e-6,
        format!("max relative drift {worst_drift:.3e} (need < 1e-6)"),
    );

    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
    match fit_rate(&pairs) {
        Ok(fit) => {
            report.check(
                "preparation slope pinned at 1/2",
                (fit.slope - 0.5).abs() < 0.05,
                format!("slope {:.4} +- {:.4} (need 0.5 +- 0.05)", fit.slope, fit.halfwidth),
            );
            svg::write_loglog(
                out.join("rate_entropy.svg"),
                "equilibrium H vs eps",
                "eps",
                "H",
                &[
                    Series::line("max_t H", pairs.clone()),
                    Series::fit(
                        format!("fit slope {:.3}", fit.slope),
                        vec![
                            (pairs[0].0, fit.eval(pairs[0].0)),
                            (pairs[pairs.len() - 1].0, fit.eval(pairs[pairs.len() - 1].0)),
                        ],
                    ),
                ],
            )?;
        }
        Err(e) => report.check("preparation slope pinned at 1/2", false, e.to_string()),
    }

    report.write(out.join("report.txt"))?;
    Ok(report)
}
