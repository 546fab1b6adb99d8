//! Corrector-identity verification for the three-dimensional cascade.
//!
//! Builds the full corrector family on a small 3D torus, evolves the
//! leading profile, and checks the twelve cancellation identities that
//! make the singular 1/eps blocks drop out of the modulated energy
//! estimate. A deliberate spoiled copy of one velocity component then
//! shows the checks localize: only the identities that contain that
//! component light up, the rest stay at solver precision.
//!
//! The same report carries the one-dimensional and transverse-stretched
//! corrector round trips, which close by construction and pin the
//! antiderivative plumbing.

use super::whole_steps;
use crate::config::Config;
use crate::error::{HarnessError, Result};
use crate::report::Report;
use longwave_core::correctors::{
    build_kdv, build_kpii, build_zk, verify_zk_cancellations, zk_alt_phi3_residual,
};
use longwave_core::dispersive::{DispersiveSolver, WaveKind};
use longwave_core::field::SpectralField;
use longwave_core::grid::TorusGrid;
use longwave_core::spectral::deriv;
use std::f64::consts::TAU;
use std::io::Write as _;
use std::path::Path;

/// Identities whose residual is zero in exact arithmetic for correctly
/// built correctors and which do not contain the second transverse
/// velocity component (1-based ids 5 and 7 do; id 10 only through an
/// x2-derivative that annihilates an x1-profile bump; id 12 couples to it
/// at the product level).
const QUIET_UNDER_U22_BUMP: [usize; 8] = [1, 2, 3, 4, 6, 8, 9, 11];

fn round_trips(report: &mut Report) -> Result<()> {
    // 1D: u2 must antidifferentiate the KdV combination, u1 equals phi1.
    let g1 = TorusGrid::line_2pi(64)?;
    let phi0 = SpectralField::from_fn(&g1, |x: &[f64]| 0.5 * x[0].cos());
    let traj = DispersiveSolver::new(WaveKind::Kdv, &g1)?.evolve(&phi0, 1e-3, 0, 1)?;
    let s = &build_kdv(&traj)?.samples[0];
    let kdv_comb = {
        let mut g = s.dt_phi1.clone();
        g.add_scaled(1.0, &s.phi1.try_zip_with(&deriv(&s.phi1, 0, 1)?, |a, b| a * b)?)?;
        g
    };
    let r_u2 = deriv(&s.u2[0], 0, 1)?.try_sub(&kdv_comb)?.linf_norm();
    let r_u1 = s.u1[0].try_sub(&s.phi1)?.linf_norm();
    report.check(
        "1d corrector round trip",
        r_u2 < 1e-10 && r_u1 == 0.0,
        format!("d_x u2 residual {r_u2:.3e}, u1 - phi1 = {r_u1:.1e} (need < 1e-10)"),
    );

    // 2D: both velocity components recover their defining x1-derivatives.
    let g2 = TorusGrid::new(&[(32, TAU), (32, TAU)])?;
    let phi0 = SpectralField::from_fn(&g2, |x: &[f64]| 0.1 * x[0].cos() * (1.0 + 0.3 * x[1].cos()));
    let traj = DispersiveSolver::new(WaveKind::KpII, &g2)?.evolve(&phi0, 1e-3, 0, 1)?;
    let s = &build_kpii(&traj)?.samples[0];
    let r_trans = deriv(&s.u1[1], 0, 1)?.try_sub(&deriv(&s.phi1, 1, 1)?)?.linf_norm();
    let kp_comb = {
        let mut g = s.dt_phi1.clone();
        g.add_scaled(1.0, &s.phi1.try_zip_with(&deriv(&s.phi1, 0, 1)?, |a, b| a * b)?)?;
        g
    };
    let r_long = deriv(&s.u2[0], 0, 1)?.try_sub(&kp_comb)?.linf_norm();
    report.check(
        "2d corrector round trip",
        r_trans < 1e-10 && r_long < 1e-10,
        format!("transverse {r_trans:.3e}, longitudinal {r_long:.3e} (need < 1e-10)"),
    );

    // 3D: the longitudinal antiderivative closes against the transport
    // combination (which here carries the d_x1 phi2 term), and the first-order
    // transverse pair is the rotated gradient of phi1. Modes stay below the
    // dealias cap so the raw pointwise product is exact.
    let g3 = TorusGrid::new(&[(16, TAU), (16, TAU), (16, TAU)])?;
    let phi0 = SpectralField::from_fn(&g3, |x: &[f64]| {
        0.3 * x[0].cos() * (1.0 + 0.4 * x[1].cos()) * (1.0 + 0.2 * x[2].sin())
    });
    let traj = DispersiveSolver::new(WaveKind::Zk, &g3)?.evolve(&phi0, 1e-3, 0, 1)?;
    let s = &build_zk(&traj)?.samples[0];
    let zk_comb = {
        let mut g = s.dt_phi1.clone();
        g.add_scaled(1.0, &s.phi1.try_zip_with(&deriv(&s.phi1, 0, 1)?, |a, b| a * b)?)?;
        g.add_scaled(1.0, &deriv(&s.phi2, 0, 1)?)?;
        g
    };
    let r_long = deriv(&s.u2[0], 0, 1)?.try_sub(&zk_comb)?.linf_norm();
    let r_rot = deriv(&s.phi1, 2, 1)?
        .try_add(&s.u1[1])?
        .linf_norm()
        .max(deriv(&s.phi1, 1, 1)?.try_sub(&s.u1[2])?.linf_norm());
    report.check(
        "3d corrector round trip",
        r_long < 1e-10 && r_rot < 1e-10,
        format!("longitudinal {r_long:.3e}, rotated gradient {r_rot:.3e} (need < 1e-10)"),
    );
    Ok(())
}

pub fn run(cfg: &Config, out: &Path) -> Result<Report> {
    let n = cfg.get_usize("grid.n")?;
    let amp = cfg.get_f64("profile.amplitude")?;
    let t_end = cfg.get_f64("study.t_end")?;
    let dt = cfg.get_f64("study.dt")?;
    let samples = cfg.get_usize("study.samples")?;
    let corruption = cfg.get_f64("study.corruption")?;
    let threshold = cfg.get_f64("study.threshold")?;
    if samples < 2 {
        return Err(HarnessError::Config("study.samples must be at least 2".into()));
    }
    let steps = whole_steps(t_end, dt)?;
    if steps % (samples - 1) != 0 {
        return Err(HarnessError::Config(format!(
            "study.samples = {samples} does not divide the {steps} steps evenly"
        )));
    }
    let stride = steps / (samples - 1);

    let grid = TorusGrid::new(&[(n, TAU), (n, TAU), (n, TAU)])?;
    let phi0 = SpectralField::from_fn(&grid, |x: &[f64]| amp * x[0].cos() * x[1].cos() * x[2].cos());
    let traj = DispersiveSolver::new(WaveKind::Zk, &grid)?.evolve(&phi0, dt, steps, stride)?;
    let set = build_zk(&traj)?;

    let mut report = Report::new("zk_identities");
    round_trips(&mut report)?;

    let mut w = std::io::BufWriter::new(std::fs::File::create(out.join("identities.csv"))?);
    writeln!(w, "t,identity,residual")?;
    let mut worst = 0.0f64;
    let mut worst_obstruction = 0.0f64;
    let mut worst_alt = 0.0f64;
    for s in &set.samples {
        let res = verify_zk_cancellations(s)?;
        for (i, r) in res.iter().enumerate() {
            writeln!(w, "{},{},{r:.12e}", s.time, i + 1)?;
            worst = worst.max(*r);
        }
        worst_obstruction = worst_obstruction.max(s.phi3_obstruction.abs());
        let alt = zk_alt_phi3_residual(s)?;
        worst_alt = worst_alt.max((alt - s.phi3_alt_obstruction.abs()).abs());
    }
    drop(w);

    report.check(
        "twelve cancellation identities",
        worst < threshold,
        format!("max residual {worst:.3e} over {} samples (need < {threshold:.1e})", set.samples.len()),
    );
    report.info(
        "phi3 mean obstruction",
        format!("largest removed line mean {worst_obstruction:.3e} (cubic in amplitude)"),
    );
    report.info(
        "alternate phi3 line",
        format!("residual matches its own obstruction to {worst_alt:.3e}"),
    );

    // Spoil one transverse velocity component and rerun the checks.
    let mut spoiled = set.samples[0].clone();
    let bump = SpectralField::from_fn(&grid, |x: &[f64]| corruption * x[0].cos());
    spoiled.u2[1] = spoiled.u2[1].try_add(&bump)?;
    let clean = verify_zk_cancellations(&set.samples[0])?;
    let hot = verify_zk_cancellations(&spoiled)?;

    let mut w = std::io::BufWriter::new(std::fs::File::create(out.join("corruption.csv"))?);
    writeln!(w, "identity,clean,spoiled")?;
    for i in 0..12 {
        writeln!(w, "{},{:.12e},{:.12e}", i + 1, clean[i], hot[i])?;
    }
    drop(w);

    let flagged = hot[4] > 1e-4 && hot[6] > 1e-4;
    report.check(
        "corruption flags its identities",
        flagged,
        format!("ids 5 and 7 rise to {:.3e}, {:.3e} (need > 1e-4)", hot[4], hot[6]),
    );
    let quiet_max = QUIET_UNDER_U22_BUMP.iter().map(|&id| hot[id - 1]).fold(0.0, f64::max);
    report.check(
        "corruption leaves exact identities quiet",
        quiet_max < threshold,
        format!("max over ids {QUIET_UNDER_U22_BUMP:?} is {quiet_max:.3e} (need < {threshold:.1e})"),
    );
    let div_shift = (hot[9] - clean[9]).abs();
    report.check(
        "divergence identity blind to an x1-profile bump",
        div_shift < 1e-12,
        format!("id 10 moved by {div_shift:.3e} (its x2-derivative kills the bump)"),
    );
    report.info(
        "product identity response",
        format!("id 12 moved from {:.3e} to {:.3e} (couples at the product level)", clean[11], hot[11]),
    );

    report.write(out.join("report.txt"))?;
    Ok(report)
}
