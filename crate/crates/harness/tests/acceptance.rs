//! Acceptance gate: one test per shipped claim, each printing a single
//! `[PASS]/[FAIL] criterion N` line (visible with `--nocapture`, or in the
//! captured output of any failure). The flagship 1D sweep runs once on its
//! default config and is shared by criteria 1-5 and 10; the full 2D2V
//! stretch is `#[ignore]`d (long-running, non-gating) and a reduced-grid
//! mechanics run stands in for it in CI.

use longwave_harness::experiments::kdv_sweep::{self, EpsRow, SweepOutcome};
use longwave_harness::ratefit::fit_rate;
use longwave_harness::report::CheckLine;
use longwave_harness::{verify, Config, ExperimentKind, Report};
use std::path::PathBuf;
use std::sync::OnceLock;

fn out_root() -> PathBuf {
    let p = std::env::temp_dir().join(format!("longwave-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&p).expect("create acceptance output root");
    p
}

fn out_dir(name: &str) -> PathBuf {
    let p = out_root().join(name);
    std::fs::create_dir_all(&p).expect("create acceptance output dir");
    p
}

/// Print the gating line for one criterion, then assert it.
fn gate(n: usize, label: &str, passed: bool, detail: &str) {
    let tag = if passed { "[PASS]" } else { "[FAIL]" };
    println!("{tag} criterion {n}: {label}: {detail}");
    assert!(passed, "criterion {n} ({label}): {detail}");
}

fn line<'a>(r: &'a Report, name: &str) -> &'a CheckLine {
    r.lines
        .iter()
        .find(|l| l.name == name)
        .unwrap_or_else(|| panic!("report '{}' has no line named '{name}'", r.title))
}

fn lines_pass(r: &Report, names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for name in names {
        let l = line(r, name);
        ok &= l.passed;
        detail.push(format!("{} ({})", l.name, l.detail));
    }
    (ok, detail.join("; "))
}

struct SweepFix {
    outcome: Option<SweepOutcome>,
    error: String,
}

impl SweepFix {
    fn rows(&self) -> Result<Vec<&EpsRow>, String> {
        let outcome = self.outcome.as_ref().ok_or_else(|| self.error.clone())?;
        let mut clean = Vec::new();
        for r in &outcome.rows {
            match &r.flagged {
                Some(why) => return Err(format!("eps {} failed: {why}", r.eps)),
                None => clean.push(r),
            }
        }
        if clean.len() < 2 {
            return Err("sweep produced fewer than two eps rows".into());
        }
        Ok(clean)
    }
}

/// The flagship sweep on its shipped default config, run once.
fn sweep() -> &'static SweepFix {
    static FIX: OnceLock<SweepFix> = OnceLock::new();
    FIX.get_or_init(|| {
        let cfg = Config::parse(verify::default_config_text(ExperimentKind::KdvSweep))
            .expect("default sweep config parses");
        match kdv_sweep::run_with_outcome(&cfg, &out_dir("kdv_sweep")) {
            Ok((_, outcome)) => SweepFix { outcome: Some(outcome), error: String::new() },
            Err(e) => SweepFix { outcome: None, error: e.to_string() },
        }
    })
}

/// A fast verify suite, run once and shared by the criteria that read it.
fn suite(which: &'static OnceLock<Report>, name: &str) -> &'static Report {
    which.get_or_init(|| match verify::run_suite(name, &out_dir(name)) {
        Ok(r) => r,
        Err(e) => {
            let mut r = Report::new(name);
            r.check(format!("{name} suite ran"), false, e.to_string());
            r
        }
    })
}

fn solvers() -> &'static Report {
    static R: OnceLock<Report> = OnceLock::new();
    suite(&R, "solvers")
}

fn inequalities() -> &'static Report {
    static R: OnceLock<Report> = OnceLock::new();
    suite(&R, "inequalities")
}

#[test]
fn c01_entropy_sqrt_eps_scaling() {
    let rows = match sweep().rows() {
        Ok(rows) => rows,
        Err(e) => return gate(1, "sqrt-eps entropy scaling", false, &e),
    };
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.eps, r.max_h)).collect();
    let fit = fit_rate(&pairs).expect("rate fit over positive entropies");
    let ratios: Vec<f64> = rows.iter().map(|r| r.max_h / r.eps.sqrt()).collect();
    let spread = ratios.iter().cloned().fold(f64::MIN, f64::max)
        / ratios.iter().cloned().fold(f64::MAX, f64::min);
    gate(
        1,
        "sqrt-eps entropy scaling",
        fit.slope >= 0.45 && spread <= 3.0,
        &format!(
            "slope {:.3} (need >= 0.45), max_t H / sqrt(eps) spread {:.3} (need <= 3)",
            fit.slope, spread
        ),
    );
}

#[test]
fn c02_cold_ions_temperature() {
    let rows = match sweep().rows() {
        Ok(rows) => rows,
        Err(e) => return gate(2, "cold-ions temperature rate", false, &e),
    };
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.eps, r.final_temperature)).collect();
    let fit = fit_rate(&pairs).expect("rate fit over positive temperatures");
    gate(
        2,
        "cold-ions temperature rate",
        fit.slope >= 0.45,
        &format!("slope {:.3} at t_end (need >= 0.45)", fit.slope),
    );
}

#[test]
fn c03_weak_convergence_pairings() {
    let rows = match sweep().rows() {
        Ok(rows) => rows,
        Err(e) => return gate(3, "weak-convergence pairings", false, &e),
    };
    let rho: Vec<(f64, f64)> = rows.iter().map(|r| (r.eps, r.rho_pairing)).collect();
    let cur: Vec<(f64, f64)> = rows.iter().map(|r| (r.eps, r.current_pairing)).collect();
    let rho_fit = fit_rate(&rho).expect("rate fit over rho pairings");
    let cur_fit = fit_rate(&cur).expect("rate fit over current pairings");
    gate(
        3,
        "weak-convergence pairings",
        rho_fit.slope >= 0.2 && cur_fit.slope >= 0.2,
        &format!(
            "<rho-1,cos x> slope {:.3}, <J-phi1,cos x> slope {:.3} (need >= 0.2)",
            rho_fit.slope, cur_fit.slope
        ),
    );
}

#[test]
fn c04_energy_monotonicity() {
    let rows = match sweep().rows() {
        Ok(rows) => rows,
        Err(e) => return gate(4, "energy monotonicity", false, &e),
    };
    let worst = rows.iter().map(|r| r.energy_violation).fold(0.0, f64::max);
    let halves = rows.iter().all(|r| {
        r.energy_violation_half_dt <= 0.6 * r.energy_violation
            || r.energy_violation_half_dt < 1e-10
    });
    gate(
        4,
        "energy monotonicity",
        worst < 1e-4 && halves,
        &format!("max relative increase {worst:.3e} (need < 1e-4), halves under dt/2: {halves}"),
    );
}

#[test]
fn c05_conservation_laws() {
    let fix = sweep();
    let rows = match fix.rows() {
        Ok(rows) => rows,
        Err(e) => return gate(5, "conservation laws", false, &e),
    };
    let worst_mass = rows.iter().map(|r| r.mass_drift).fold(0.0, f64::max);
    let orders = &fix.outcome.as_ref().expect("rows() checked").lc1_orders;
    let orders_ok = !orders.is_empty() && orders.iter().all(|&o| o >= 1.0);
    gate(
        5,
        "conservation laws",
        worst_mass < 1e-9 && orders_ok,
        &format!(
            "max mass drift {worst_mass:.3e} (need < 1e-9), weak charge residual orders {orders:.2?} (need >= 1)"
        ),
    );
}

#[test]
fn c06_dispersive_solver() {
    let (ok, detail) = lines_pass(
        solvers(),
        &[
            "linear dispersion phase (k^3/2)",
            "mean conserved over t = 10",
            "int phi^2 drift over t = 10",
            "time-step self-convergence order",
        ],
    );
    gate(6, "dispersive solver", ok, &detail);
}

#[test]
fn c07_corrector_identities() {
    let report = match verify::run_suite("correctors", &out_dir("correctors")) {
        Ok(r) => r,
        Err(e) => return gate(7, "corrector identities", false, &e.to_string()),
    };
    gate(
        7,
        "corrector identities",
        report.all_passed(),
        &format!(
            "{} asserted lines (round trips, twelve cancellations, corruption localization)",
            report.lines.iter().filter(|l| l.asserted).count()
        ),
    );
}

#[test]
fn c08_euler_poisson_cascade() {
    let report = match verify::run_suite("cascade", &out_dir("cascade")) {
        Ok(r) => r,
        Err(e) => return gate(8, "euler-poisson cascade", false, &e.to_string()),
    };
    gate(
        8,
        "euler-poisson cascade",
        report.all_passed(),
        &format!(
            "{} asserted residual-slope lines over eps in {{0.2, 0.1, 0.05, 0.025}}",
            report.lines.iter().filter(|l| l.asserted).count()
        ),
    );
}

#[test]
fn c09_poisson_solvers() {
    let (ok, detail) = lines_pass(
        solvers(),
        &[
            "Newton budget on shipped profiles",
            "charge laws agree at amplitude 1e-4",
        ],
    );
    gate(9, "poisson solvers", ok, &detail);
}

#[test]
fn c10_inequality_and_lemma() {
    let (ineq_ok, ineq_detail) = lines_pass(
        inequalities(),
        &[
            "squared root-difference inequality, 10^4 seeded pairs",
            "llogl nonnegative on random smooth fields",
        ],
    );
    let (lemma_ok, lemma_detail) = match sweep().rows() {
        Ok(rows) => {
            let bounded = rows.iter().all(|r| r.lemma_lhs <= r.lemma_bound);
            let ratios: Vec<f64> = rows.iter().map(|r| r.lemma_lhs / r.eps.sqrt()).collect();
            let growth = ratios.iter().cloned().fold(f64::MIN, f64::max) / ratios[0];
            (
                bounded && growth <= 3.0,
                format!(
                    "lhs <= bound on all sweep states: {bounded}, lhs/sqrt(eps) growth {growth:.3} over the largest-eps anchor (need <= 3)"
                ),
            )
        }
        Err(e) => (false, e),
    };
    gate(
        10,
        "inequality and lemma suite",
        ineq_ok && lemma_ok,
        &format!("{ineq_detail}; {lemma_detail}"),
    );
}

/// Stand-in for the long 2D2V stretch: same driver and assertions
/// (mass, stored-potential consistency, nonnegative entropy parts, energy
/// bound, H decreasing in eps, factor-5 window) on a reduced grid.
#[test]
fn c11_transverse_sweep_mechanics() {
    let mut cfg = Config::parse(verify::default_config_text(ExperimentKind::KpiiSweep))
        .expect("default 2d2v config parses");
    let overrides: Vec<(String, String)> = [
        ("grid.nx1", "16"),
        ("grid.nx2", "8"),
        ("grid.nv1", "32"),
        ("grid.nv2", "32"),
        ("profile.amplitude", "0.05"),
        ("sweep.eps_list", "0.2, 0.1"),
        ("sweep.t_end", "0.1"),
        ("sweep.c_cfl", "0.05"),
        ("sweep.stride", "5"),
    ]
    .iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect();
    cfg.apply_overrides(&overrides).expect("reduced-grid overrides");
    match longwave_harness::experiments::run(&cfg, &out_dir("kpii_mechanics")) {
        Ok(report) => gate(
            11,
            "transverse sweep mechanics (reduced grid)",
            report.all_passed(),
            &format!(
                "{} asserted lines on 16x8x32x32",
                report.lines.iter().filter(|l| l.asserted).count()
            ),
        ),
        Err(e) => gate(11, "transverse sweep mechanics (reduced grid)", false, &e.to_string()),
    }
}

/// The full stretch run at the shipped 64x32x48x32 resolution: tens of
/// minutes, not gating. `cargo test -p longwave-harness --test acceptance
/// -- --ignored c11_transverse_sweep_stretch --nocapture` runs it.
#[test]
#[ignore]
fn c11_transverse_sweep_stretch() {
    let cfg = Config::parse(verify::default_config_text(ExperimentKind::KpiiSweep))
        .expect("default 2d2v config parses");
    match longwave_harness::experiments::run(&cfg, &out_dir("kpii_stretch")) {
        Ok(report) => gate(
            11,
            "transverse sweep stretch (full grid)",
            report.all_passed(),
            &format!(
                "{} asserted lines on 64x32x48x32, eps {{0.1, 0.05}}",
                report.lines.iter().filter(|l| l.asserted).count()
            ),
        ),
        Err(e) => gate(11, "transverse sweep stretch (full grid)", false, &e.to_string()),
    }
}
