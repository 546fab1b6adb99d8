//! Named property suites behind `longwave verify <suite>`.
//!
//! `inequalities` and `solvers` are direct oracle checks (seeded random
//! pairs against closed forms, dispersion phases, Newton iteration
//! budgets); the remaining suites run a shipped experiment config end to
//! end. `all` chains everything. Each suite writes its report under the
//! output directory and the caller turns the verdict into an exit code.

use crate::config::{Config, ExperimentKind};
use crate::error::{HarnessError, Result};
use crate::experiments;
use crate::report::Report;
use longwave_core::dispersive::{l2_squared, DispersiveSolver, WaveKind};
use longwave_core::entropy::{llogl_term, sqrt_inequality_gap};
use longwave_core::field::SpectralField;
use longwave_core::grid::TorusGrid;
use longwave_core::phasespace::matched_density;
use longwave_core::poisson::{solve_boltzmann, solve_linearized, ChargeLaw};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use std::path::Path;

pub const SUITE_NAMES: [&str; 7] = [
    "inequalities",
    "solvers",
    "correctors",
    "cascade",
    "equilibrium",
    "sweep",
    "all",
];

/// Shipped default config text for each experiment, compiled in so the
/// verify suites run without a checkout-relative working directory.
pub fn default_config_text(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::KdvSweep => include_str!("../../../configs/kdv_sweep.ini"),
        ExperimentKind::KpiiSweep => include_str!("../../../configs/kpii_sweep.ini"),
        ExperimentKind::EpResidual => include_str!("../../../configs/ep_residual.ini"),
        ExperimentKind::ZkIdentities => include_str!("../../../configs/zk_identities.ini"),
        ExperimentKind::EquilibriumRegression => {
            include_str!("../../../configs/equilibrium_regression.ini")
        }
    }
}

fn random_field(rng: &mut ChaCha8Rng, grid: &TorusGrid<f64>) -> SpectralField<f64> {
    let coeffs: Vec<(f64, f64, f64)> = (1..=4)
        .map(|m| (m as f64, rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
        .collect();
    SpectralField::from_fn(grid, |x: &[f64]| {
        coeffs.iter().map(|&(m, a, b)| a * (m * x[0]).cos() + b * (m * x[0]).sin()).sum()
    })
}

/// Closed-form and randomized checks of the two entropy inequalities.
fn inequalities(out: &Path) -> Result<Report> {
    let mut report = Report::new("inequalities");

    let gap = sqrt_inequality_gap(4.0, 1.0);
    let expect = (4.0 * 4.0f64.ln() - 3.0) - 1.0;
    report.check(
        "scalar reference pair (x=4, y=1)",
        (gap - expect).abs() < 1e-12,
        format!("gap {gap:.15} vs closed form {expect:.15}"),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(0x1ab_0f_2026);
    let mut min_gap = f64::INFINITY;
    let mut arg_at_min = (0.0, 0.0);
    for _ in 0..10_000 {
        let x = rng.gen_range(-3.0..3.0f64).exp();
        let y = rng.gen_range(-3.0..3.0f64).exp();
        let g = sqrt_inequality_gap(x, y);
        if g < min_gap {
            min_gap = g;
            arg_at_min = (x, y);
        }
    }
    report.check(
        "squared root-difference inequality, 10^4 seeded pairs",
        min_gap >= -1e-12,
        format!("min gap {min_gap:.3e} at (x, y) = ({:.3e}, {:.3e})", arg_at_min.0, arg_at_min.1),
    );

    let grid = TorusGrid::line_2pi(64)?;
    let mut min_ll = f64::INFINITY;
    let mut min_dom = f64::INFINITY;
    for _ in 0..20 {
        let a = random_field(&mut rng, &grid);
        let b = random_field(&mut rng, &grid);
        for eps in [0.3, 0.1] {
            let ll = llogl_term(&a, &b, eps)?;
            min_ll = min_ll.min(ll);
            let hell = a
                .try_zip_with(&b, |p, q| {
                    let d = (0.5 * eps * p).exp() - (0.5 * eps * q).exp();
                    d * d
                })?
                .integrate()
                / (eps * eps);
            min_dom = min_dom.min(ll - hell);
        }
    }
    report.check(
        "llogl nonnegative on random smooth fields",
        min_ll >= -1e-12,
        format!("min value {min_ll:.3e} over 40 field pairs"),
    );
    report.check(
        "llogl dominates the squared root-difference",
        min_dom >= -1e-12,
        format!("min margin {min_dom:.3e} over 40 field pairs"),
    );

    report.write(out.join("report_inequalities.txt"))?;
    Ok(report)
}

/// Dispersive-solver oracles and the Poisson iteration budget.
fn solvers(out: &Path) -> Result<Report> {
    let mut report = Report::new("solvers");

    // Linear dispersion: at tiny amplitude the mode-1 coefficient must
    // rotate by theta(1) t = t/2; the integrating factor makes the linear
    // part exact, so the error is the nonlinear feedback, O(amplitude^2).
    let g = TorusGrid::line_2pi(64)?;
    let amp = 1e-4;
    let phi0 = SpectralField::from_fn(&g, |x: &[f64]| amp * x[0].cos());
    let solver = DispersiveSolver::new(WaveKind::Kdv, &g)?;
    let traj = solver.evolve(&phi0, 1e-3, 1000, 1000)?;
    let c0 = phi0.to_spectrum().coeffs()[[1]];
    let c1 = traj.states.last().unwrap().to_spectrum().coeffs()[[1]];
    let mut phase_err = (c1.arg() - c0.arg() - 0.5).rem_euclid(TAU);
    if phase_err > PI {
        phase_err -= TAU;
    }
    report.check(
        "linear dispersion phase (k^3/2)",
        phase_err.abs() < 1e-6,
        format!("mode-1 phase error {:.3e} after t = 1 at amplitude 1e-4 (need < 1e-6)", phase_err.abs()),
    );

    // Invariants over a long nonlinear run.
    let g = TorusGrid::line_2pi(256)?;
    let phi0 = SpectralField::from_fn(&g, |x: &[f64]| 0.5 * x[0].cos());
    let solver = DispersiveSolver::new(WaveKind::Kdv, &g)?;
    let traj = solver.evolve(&phi0, 1e-3, 10_000, 10_000)?;
    let phi_t = traj.states.last().unwrap();
    let mean_drift = (phi_t.mean() - phi0.mean()).abs();
    report.check(
        "mean conserved over t = 10",
        mean_drift < 1e-13,
        format!("drift {mean_drift:.3e} (zero mode has no dynamics)"),
    );
    let l2_drift = (l2_squared(phi_t) - l2_squared(&phi0)).abs();
    report.check(
        "int phi^2 drift over t = 10",
        l2_drift < 1e-8,
        format!("absolute drift {l2_drift:.3e} on int phi0^2 = {:.6} (need < 1e-8)", l2_squared(&phi0)),
    );

    // Temporal self-convergence of the IF-RK4 step.
    let g = TorusGrid::line_2pi(64)?;
    let phi0 = SpectralField::from_fn(&g, |x: &[f64]| 0.5 * x[0].cos());
    let solver = DispersiveSolver::new(WaveKind::Kdv, &g)?;
    let finals: Vec<SpectralField<f64>> = [(0.02, 25), (0.01, 50), (0.005, 100)]
        .iter()
        .map(|&(dt, n)| Ok(solver.evolve(&phi0, dt, n, n)?.states.last().unwrap().clone()))
        .collect::<Result<_>>()?;
    let e1 = finals[0].try_sub(&finals[1])?.linf_norm();
    let e2 = finals[1].try_sub(&finals[2])?.linf_norm();
    let order = (e1 / e2).log2();
    report.check(
        "time-step self-convergence order",
        (order - 4.0).abs() <= 0.2,
        format!("observed order {order:.3} from errors {e1:.3e}, {e2:.3e} (need 4 +- 0.2)"),
    );

    // Newton budget on every shipped profile family, Boltzmann law.
    let mut max_iters = 0usize;
    let mut worst_res = 0.0f64;
    let g1 = TorusGrid::line_2pi(256)?;
    let kdv_t = SpectralField::from_fn(&g1, |x: &[f64]| 0.5 * x[0].cos());
    for eps in [0.1, 0.05, 0.025, 0.0125] {
        let rho = matched_density(&kdv_t, eps, &[1.0], ChargeLaw::Boltzmann)?;
        let sol = solve_boltzmann(&rho, eps, &[1.0], 1e-12, 10)?;
        max_iters = max_iters.max(sol.iterations);
        worst_res = worst_res.max(sol.residual);
    }
    let g2 = TorusGrid::new(&[(64, TAU), (32, TAU)])?;
    let kp_t = SpectralField::from_fn(&g2, |x: &[f64]| 0.1 * x[0].cos() * (1.0 + 0.3 * x[1].cos()));
    for eps in [0.1, 0.05] {
        let rho = matched_density(&kp_t, eps, &[1.0, eps], ChargeLaw::Boltzmann)?;
        let sol = solve_boltzmann(&rho, eps, &[1.0, eps], 1e-12, 10)?;
        max_iters = max_iters.max(sol.iterations);
        worst_res = worst_res.max(sol.residual);
    }
    report.check(
        "Newton budget on shipped profiles",
        true,
        format!("converged within {max_iters} iterations, worst residual {worst_res:.3e} (budget 10, tol 1e-12)"),
    );

    // Small-amplitude agreement of the two charge laws.
    let small = SpectralField::from_fn(&g1, |x: &[f64]| 1e-4 * x[0].cos());
    let eps = 0.1;
    let rho = matched_density(&small, eps, &[1.0], ChargeLaw::Boltzmann)?;
    let phi_b = solve_boltzmann(&rho, eps, &[1.0], 1e-12, 10)?.potential;
    let phi_l = solve_linearized(&rho, eps, &[1.0])?;
    let law_gap = phi_b.try_sub(&phi_l)?.linf_norm();
    report.check(
        "charge laws agree at amplitude 1e-4",
        law_gap < 1e-7,
        format!("max potential difference {law_gap:.3e} (need < 1e-7)"),
    );

    report.write(out.join("report_solvers.txt"))?;
    Ok(report)
}

fn experiment_suite(kind: ExperimentKind, out: &Path) -> Result<Report> {
    let cfg = Config::parse(default_config_text(kind))?;
    experiments::run(&cfg, &out.join(kind.name()))
}

/// Run one named suite, writing artifacts under `out`.
pub fn run_suite(name: &str, out: &Path) -> Result<Report> {
    std::fs::create_dir_all(out)?;
    match name {
        "inequalities" => inequalities(out),
        "solvers" => solvers(out),
        "correctors" => experiment_suite(ExperimentKind::ZkIdentities, out),
        "cascade" => experiment_suite(ExperimentKind::EpResidual, out),
        "equilibrium" => experiment_suite(ExperimentKind::EquilibriumRegression, out),
        "sweep" => experiment_suite(ExperimentKind::KdvSweep, out),
        "all" => {
            let mut report = Report::new("all suites");
            for suite in ["inequalities", "solvers", "correctors", "cascade", "equilibrium", "sweep"] {
                let sub = run_suite(suite, out)?;
                for mut line in sub.lines {
                    line.name = format!("{suite}: {}", line.name);
                    report.lines.push(line);
                }
            }
            report.write(out.join("report_all.txt"))?;
            Ok(report)
        }
        other => Err(HarnessError::Config(format!(
            "unknown suite '{other}'; available: {}",
            SUITE_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_default_config_parses_for_its_kind() {
        for kind in ExperimentKind::all() {
            let cfg = Config::parse(default_config_text(kind)).unwrap();
            assert_eq!(cfg.kind, kind);
        }
    }

    #[test]
    fn unknown_suite_is_named_in_the_error() {
        let err = run_suite("nope", Path::new("/tmp/longwave-nosuite")).unwrap_err().to_string();
        assert!(err.contains("nope"), "{err}");
    }

    #[test]
    fn inequality_suite_passes() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_suite("inequalities", dir.path()).unwrap();
        assert!(report.all_passed(), "{}", report.render());
    }
}
