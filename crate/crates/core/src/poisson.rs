//! Electric-potential solvers on the torus.
//!
//! Two charge laws appear in the scaled systems. The linearized law
//!
//! ```text
//! -eps^2 (w_1 d^2/dx_1^2 + ... + w_d d^2/dx_d^2) phi + eps phi = rho - 1
//! ```
//!
//! is a single diagonal division in Fourier space; the per-axis weights
//! `w_a` carry the anisotropy of the 2D scaling (`[1, eps]` there, `[1]`
//! in 1D). The full Boltzmann law replaces `1 + eps phi` by `e^{eps phi}`:
//!
//! ```text
//! -eps^2 (sum_a w_a d^2/dx_a^2) phi + e^{eps phi} = rho,
//! ```
//!
//! solved by a damped Newton iteration whose linear stages freeze the
//! Jacobian's variable coefficient at its spatial mean, so every inner
//! solve stays a diagonal spectral division.

use crate::error::{CoreError, Result};
use crate::field::SpectralField;
use crate::scalar::Real;
use crate::spectral::laplacian;
use num_complex::Complex;

/// Which closure relates the potential to the charge density.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChargeLaw {
    Linearized,
    Boltzmann,
}

/// Outcome of the Boltzmann Newton iteration.
#[derive(Clone, Debug)]
pub struct BoltzmannSolve<T> {
    pub potential: SpectralField<T>,
    pub iterations: usize,
    pub residual: T,
}

/// Per-axis coefficients of the screened operator for each long-wave
/// scaling: `eps^2 sum_a w_a k_a^2 + eps`. The isotropic 1D and 3D limits
/// use unit weights; the anisotropic 2D scaling carries an extra factor
/// `eps` on the slow axis (its second derivative enters at `eps^3`).
pub fn anisotropy_weights<T: Real>(kind: crate::dispersive::WaveKind, eps: T) -> Vec<T> {
    match kind {
        crate::dispersive::WaveKind::Kdv => vec![T::one()],
        crate::dispersive::WaveKind::KpII => vec![T::one(), eps],
        crate::dispersive::WaveKind::Zk => vec![T::one(); 3],
    }
}

fn check_args<T: Real>(rho: &SpectralField<T>, eps: T, weights: &[T]) -> Result<()> {
    if !(eps > T::zero()) {
        return Err(CoreError::Invalid(format!("eps must be positive, got {eps}")));
    }
    if weights.len() != rho.grid().ndim() {
        return Err(CoreError::Invalid(format!(
            "{} anisotropy weights for a {}-axis grid",
            weights.len(),
            rho.grid().ndim()
        )));
    }
    Ok(())
}

/// Solve the linearized law by per-mode division. The zero mode is carried
/// by the `eps phi` term, so a mean of `rho` away from 1 shows up as a
/// constant offset `(mean(rho) - 1)/eps` rather than an error.
pub fn solve_linearized<T: Real>(
    rho: &SpectralField<T>,
    eps: T,
    weights: &[T],
) -> Result<SpectralField<T>> {
    check_args(rho, eps, weights)?;
    let n_total = T::of(rho.grid().total_points() as f64);
    let eps2 = eps * eps;
    let mut s = rho.to_spectrum();
    s.map_modes(|k, c| {
        let mut k2 = T::zero();
        let mut zero_mode = true;
        for (a, &ka) in k.iter().enumerate() {
            k2 += weights[a] * ka * ka;
            if ka != T::zero() {
                zero_mode = false;
            }
        }
        if zero_mode {
            // subtract the background: the transform of 1 is n_total at k = 0
            *c = *c - Complex::new(n_total, T::zero());
        }
        *c = *c / (eps2 * k2 + eps);
    });
    Ok(s.to_field())
}

fn boltzmann_residual<T: Real>(
    phi: &SpectralField<T>,
    rho: &SpectralField<T>,
    eps: T,
    weights: &[T],
) -> Result<SpectralField<T>> {
    let lap = laplacian(phi, weights)?;
    let mut r = phi.map(|p| (eps * p).exp()).try_sub(rho)?;
    r.add_scaled(-(eps * eps), &lap)?;
    Ok(r)
}

/// Solve the Boltzmann law. Residuals are measured in the max norm against
/// `tol * max(1, ||rho||_inf)`; `iterations` counts accepted Newton updates.
pub fn solve_boltzmann<T: Real>(
    rho: &SpectralField<T>,
    eps: T,
    weights: &[T],
    tol: T,
    max_iter: usize,
) -> Result<BoltzmannSolve<T>> {
    check_args(rho, eps, weights)?;
    let min_rho = rho.min_value();
    if !(min_rho > T::zero()) {
        return Err(CoreError::NonPositiveDensity {
            min_rho: min_rho.to_f64(),
        });
    }
    let target = tol * T::one().max(rho.linf_norm());
    let eps2 = eps * eps;

    // exact whenever the Laplacian term vanishes
    let mut phi = rho.map(|q| q.ln() / eps);
    let mut res_field = boltzmann_residual(&phi, rho, eps, weights)?;
    let mut res = res_field.linf_norm();
    let mut iterations = 0;

    while !(res <= target) {
        if iterations >= max_iter {
            return Err(CoreError::NoConvergence {
                iters: iterations,
                residual: res.to_f64(),
                target: target.to_f64(),
            });
        }
        // mean-frozen Jacobian: -eps^2 lap_w + eps cbar, diagonal in Fourier
        let cbar = phi.map(|p| (eps * p).exp()).mean();
        let mut s = res_field.to_spectrum();
        s.map_modes(|k, c| {
            let mut k2 = T::zero();
            for (a, &ka) in k.iter().enumerate() {
                k2 += weights[a] * ka * ka;
            }
            *c = -*c / (eps2 * k2 + eps * cbar);
        });
        let delta = s.to_field();

        let floor = T::of(1.0 / 64.0);
        let mut lambda = T::one();
        loop {
            let mut trial = phi.clone();
            trial.add_scaled(lambda, &delta)?;
            let trial_res_field = boltzmann_residual(&trial, rho, eps, weights)?;
            let trial_res = trial_res_field.linf_norm();
            if trial_res < res || lambda <= floor {
                phi = trial;
                res_field = trial_res_field;
                res = trial_res;
                break;
            }
            lambda = lambda / T::of(2.0);
        }
        iterations += 1;
    }
    phi.check_finite("boltzmann potential")?;
    Ok(BoltzmannSolve {
        potential: phi,
        iterations,
        residual: res,
    })
}

/// Dispatch on the law; Boltzmann uses the module defaults (1e-12, 25).
pub fn solve<T: Real>(
    law: ChargeLaw,
    rho: &SpectralField<T>,
    eps: T,
    weights: &[T],
) -> Result<SpectralField<T>> {
    match law {
        ChargeLaw::Linearized => solve_linearized(rho, eps, weights),
        ChargeLaw::Boltzmann => {
            Ok(solve_boltzmann(rho, eps, weights, T::of(1e-12), 25)?.potential)
        }
    }
}
