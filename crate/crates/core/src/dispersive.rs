//! Pseudospectral integrators for the three long-wave limit equations on
//! tori, all of the common form
//!
//! ```text
//! d phi/dt = -c * P(phi d_x1 phi) + L phi,
//! ```
//!
//! with `P` the 2/3-rule projection and `L` a constant-coefficient
//! dispersive operator, diagonal in Fourier with purely imaginary symbol
//! `i theta(k)`:
//!
//! - KdV (1 axis):   `2 dphi/dt + 3 phi phi_x + phi_xxx = 0`,
//!   so `c = 3/2`, `theta = k^3 / 2`.
//! - KP-II (2 axes): `d_x1(2 dphi/dt + 3 phi phi_x1 + phi_x1x1x1) + phi_x2x2 = 0`,
//!   so `c = 3/2`, `theta = k1^3/2 - k2^2/(2 k1)` for `k1 != 0`; the
//!   nonlocal term forces zero mean along x1, enforced on the data and
//!   projected in the nonlinearity.
//! - ZK (2 or 3 axes): `2 dphi/dt + 2 phi phi_x1 + d_x1(lap + lap_perp) phi = 0`,
//!   so `c = 1`, `theta = k1 (k1^2 + 2 |k_perp|^2) / 2`.
//!
//! Time stepping is integrating-factor RK4: the linear phase rotation is
//! applied exactly through `e^{i theta dt}` tables, RK4 handles only the
//! dealiased convective term. With the strict-2/3 projection the quadratic
//! term is alias-free, so `int phi` is conserved exactly and `int phi^2`
//! drifts only through the O(dt^4) time error.

use crate::error::{CoreError, Result};
use crate::field::{SpectralField, Spectrum};
use crate::grid::TorusGrid;
use crate::scalar::Real;
use crate::spectral;
use ndarray::{ArrayD, Axis, IxDyn, Zip};
use num_complex::Complex;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WaveKind {
    Kdv,
    KpII,
    Zk,
}

impl WaveKind {
    pub fn name(self) -> &'static str {
        match self {
            WaveKind::Kdv => "kdv",
            WaveKind::KpII => "kpii",
            WaveKind::Zk => "zk",
        }
    }
}

/// Sampled solution history: `rates[i]` is the full right-hand side at
/// `states[i]`, stored so downstream consumers never have to finite-
/// difference the trajectory in time.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    pub kind: WaveKind,
    pub times: Vec<T>,
    pub states: Vec<SpectralField<T>>,
    pub rates: Vec<SpectralField<T>>,
}

pub struct DispersiveSolver<T: Real> {
    kind: WaveKind,
    grid: TorusGrid<T>,
    /// Imaginary part of the linear symbol, zeroed on Nyquist slots.
    theta: ArrayD<T>,
    /// Multiplier table for d/dx1, Nyquist zeroed.
    ik1: ArrayD<Complex<T>>,
    nonlin: T,
}

impl<T: Real> DispersiveSolver<T> {
    pub fn new(kind: WaveKind, grid: &TorusGrid<T>) -> Result<Self> {
        let d = grid.ndim();
        let ok = match kind {
            WaveKind::Kdv => d == 1,
            WaveKind::KpII => d == 2,
            WaveKind::Zk => d == 2 || d == 3,
        };
        if !ok {
            return Err(CoreError::InvalidGrid(format!(
                "{} needs {} spatial axes, grid has {d}",
                kind.name(),
                match kind {
                    WaveKind::Kdv => "1",
                    WaveKind::KpII => "2",
                    WaveKind::Zk => "2 or 3",
                }
            )));
        }
        let ks: Vec<Vec<T>> = (0..d).map(|a| grid.wavenumbers(a)).collect();
        let ns = grid.shape();
        let half = T::of(0.5);
        let theta = ArrayD::from_shape_fn(IxDyn(&ns), |idx| {
            for a in 0..d {
                if idx[a] == ns[a] / 2 {
                    return T::zero();
                }
            }
            let k1 = ks[0][idx[0]];
            match kind {
                WaveKind::Kdv => half * k1 * k1 * k1,
                WaveKind::KpII => {
                    if k1 == T::zero() {
                        T::zero()
                    } else {
                        let k2 = ks[1][idx[1]];
                        half * k1 * k1 * k1 - k2 * k2 / (T::of(2.0) * k1)
                    }
                }
                WaveKind::Zk => {
                    let mut kperp2 = T::zero();
                    for a in 1..d {
                        let ka = ks[a][idx[a]];
                        kperp2 += ka * ka;
                    }
                    half * k1 * (k1 * k1 + T::of(2.0) * kperp2)
                }
            }
        });
        let ik1 = ArrayD::from_shape_fn(IxDyn(&ns), |idx| {
            if idx[0] == ns[0] / 2 {
                Complex::new(T::zero(), T::zero())
            } else {
                Complex::new(T::zero(), ks[0][idx[0]])
            }
        });
        let nonlin = match kind {
            WaveKind::Kdv | WaveKind::KpII => T::of(1.5),
            WaveKind::Zk => T::one(),
        };
        Ok(DispersiveSolver {
            kind,
            grid: grid.clone(),
            theta,
            ik1,
            nonlin,
        })
    }

    pub fn kind(&self) -> WaveKind {
        self.kind
    }

    pub fn grid(&self) -> &TorusGrid<T> {
        &self.grid
    }

    /// -c * P(phi d_x1 phi), with the k1 = 0 plane zeroed for KP-II.
    fn nonlinear(&self, coeffs: &ArrayD<Complex<T>>) -> ArrayD<Complex<T>> {
        let mut s = Spectrum::from_parts(self.grid.clone(), coeffs.clone());
        s.dealias();
        let mut ds = s.clone();
        Zip::from(ds.coeffs_mut())
            .and(&self.ik1)
            .for_each(|c, &m| *c = *c * m);
        let phi = s.to_field();
        let dphi = ds.to_field();
        let prod = phi
            .try_zip_with(&dphi, |a, b| a * b)
            .expect("fields share one grid");
        let mut out = prod.to_spectrum();
        out.dealias();
        let c = self.nonlin;
        out.coeffs_mut().map_inplace(|z| *z = -*z * c);
        if self.kind == WaveKind::KpII {
            out.coeffs_mut()
                .index_axis_mut(Axis(0), 0)
                .fill(Complex::new(T::zero(), T::zero()));
        }
        out.coeffs().clone()
    }

    /// Full right-hand side as a real-space field.
    pub fn rhs(&self, phi: &SpectralField<T>) -> Result<SpectralField<T>> {
        self.grid.same_grid(phi.grid())?;
        let spec = phi.to_spectrum();
        Ok(self.rhs_from_spectrum(spec.coeffs()))
    }

    fn rhs_from_spectrum(&self, coeffs: &ArrayD<Complex<T>>) -> SpectralField<T> {
        let mut rate = self.nonlinear(coeffs);
        Zip::from(&mut rate).and(coeffs).and(&self.theta).for_each(|r, &y, &th| {
            *r = *r + y * Complex::new(T::zero(), th);
        });
        Spectrum::from_parts(self.grid.clone(), rate).to_field()
    }

    fn phase_tables(&self, dt: T) -> (ArrayD<Complex<T>>, ArrayD<Complex<T>>) {
        let half = self.theta.map(|&th| Complex::from_polar(T::one(), th * dt * T::of(0.5)));
        let full = self.theta.map(|&th| Complex::from_polar(T::one(), th * dt));
        (half, full)
    }

    fn step_spectrum(
        &self,
        y: &ArrayD<Complex<T>>,
        dt: T,
        e_half: &ArrayD<Complex<T>>,
        e_full: &ArrayD<Complex<T>>,
    ) -> ArrayD<Complex<T>> {
        let half_dt = dt * T::of(0.5);
        let sixth_dt = dt / T::of(6.0);

        let ka = self.nonlinear(y);

        let mut t1 = y.clone();
        Zip::from(&mut t1).and(&ka).for_each(|t, &a| *t = *t + a * half_dt);
        Zip::from(&mut t1).and(e_half).for_each(|t, &e| *t = *t * e);
        let kb = self.nonlinear(&t1);

        let mut ey = y.clone();
        Zip::from(&mut ey).and(e_half).for_each(|t, &e| *t = *t * e);
        let mut t2 = ey.clone();
        Zip::from(&mut t2).and(&kb).for_each(|t, &b| *t = *t + b * half_dt);
        let kc = self.nonlinear(&t2);

        let mut t3 = y.clone();
        Zip::from(&mut t3).and(e_full).for_each(|t, &e| *t = *t * e);
        let mut t3b = t3.clone();
        Zip::from(&mut t3b).and(&kc).and(e_half).for_each(|t, &c, &e| *t = *t + c * e * dt);
        let kd = self.nonlinear(&t3b);

        // y' = E2 y + dt/6 (E2 a + 2 E (b + c) + d)
        let mut out = t3; // already E2 y
        Zip::from(&mut out)
            .and(&ka)
            .and(e_full)
            .for_each(|t, &a, &e2| *t = *t + a * e2 * sixth_dt);
        Zip::from(&mut out)
            .and(&kb)
            .and(&kc)
            .and(e_half)
            .for_each(|t, &b, &c, &e| *t = *t + (b + c) * e * (sixth_dt * T::of(2.0)));
        Zip::from(&mut out).and(&kd).for_each(|t, &d| *t = *t + d * sixth_dt);
        out
    }

    /// One IF-RK4 step (builds phase tables; `evolve` amortizes them).
    pub fn step(&self, phi: &SpectralField<T>, dt: T) -> Result<SpectralField<T>> {
        self.grid.same_grid(phi.grid())?;
        self.validate_data(phi)?;
        let (e_half, e_full) = self.phase_tables(dt);
        let y = phi.to_spectrum();
        let out = self.step_spectrum(y.coeffs(), dt, &e_half, &e_full);
        Ok(Spectrum::from_parts(self.grid.clone(), out).to_field())
    }

    /// KP-II needs zero mean along x1 on every line for d_x1^{-1}.
    pub fn validate_data(&self, phi: &SpectralField<T>) -> Result<()> {
        if self.kind != WaveKind::KpII {
            return Ok(());
        }
        let spec = phi.to_spectrum();
        let plane = spec.coeffs().index_axis(Axis(0), 0);
        let mut worst = T::zero();
        for c in plane.iter() {
            worst = worst.max(c.norm());
        }
        let scale = T::of(phi.grid().total_points() as f64) * phi.linf_norm().max(T::one());
        if worst > T::of(1e-10) * scale {
            return Err(CoreError::Invalid(
                "kpii data must have zero mean along x1 on every line".into(),
            ));
        }
        Ok(())
    }

    /// Fixed-step evolution, sampling every `stride` steps (and the final
    /// state). Aborts with `BlowUp` once the solution exceeds 1e3 times its
    /// initial amplitude, or stops being finite.
    pub fn evolve(
        &self,
        phi0: &SpectralField<T>,
        dt: T,
        steps: usize,
        stride: usize,
    ) -> Result<Trajectory<T>> {
        self.grid.same_grid(phi0.grid())?;
        if stride == 0 {
            return Err(CoreError::Invalid("sample stride must be at least 1".into()));
        }
        if !(dt > T::zero()) {
            return Err(CoreError::Invalid(format!("dt must be positive, got {dt}")));
        }
        self.validate_data(phi0)?;

        let (e_half, e_full) = self.phase_tables(dt);
        let mut y = phi0.to_spectrum().coeffs().clone();
        let coeff_max0 = y.iter().fold(T::zero(), |m, c| m.max(c.norm()));
        let cap = T::of(1e3) * coeff_max0.max(T::of(f64::MIN_POSITIVE));

        let mut traj = Trajectory {
            kind: self.kind,
            times: Vec::new(),
            states: Vec::new(),
            rates: Vec::new(),
        };
        let sample = |t: T, coeffs: &ArrayD<Complex<T>>, traj: &mut Trajectory<T>| {
            let field = Spectrum::from_parts(self.grid.clone(), coeffs.clone()).to_field();
            let rate = self.rhs_from_spectrum(coeffs);
            traj.times.push(t);
            traj.states.push(field);
            traj.rates.push(rate);
        };
        sample(T::zero(), &y, &mut traj);

        for i in 1..=steps {
            y = self.step_spectrum(&y, dt, &e_half, &e_full);
            let t = T::of(i as f64) * dt;
            let m = y.iter().fold(T::zero(), |m, c| m.max(c.norm()));
            if !(m <= cap) {
                return Err(CoreError::BlowUp {
                    t: t.to_f64(),
                    max: m.to_f64(),
                    cap: cap.to_f64(),
                });
            }
            if i % stride == 0 || i == steps {
                sample(t, &y, &mut traj);
            }
        }
        Ok(traj)
    }
}

/// Conserved mass of every kind: the spatial integral of phi.
pub fn mass<T: Real>(phi: &SpectralField<T>) -> T {
    phi.integrate()
}

/// int phi^2 dx, conserved by the spatial discretization.
pub fn l2_squared<T: Real>(phi: &SpectralField<T>) -> T {
    let n = phi.l2_norm();
    n * n
}

/// KdV energy int (1/4 (d_x phi)^2 - 1/4 phi^3) dx, a conserved quantity of
/// `2 dphi/dt + 3 phi phi_x + phi_xxx = 0`.
pub fn kdv_hamiltonian<T: Real>(phi: &SpectralField<T>) -> Result<T> {
    if phi.grid().ndim() != 1 {
        return Err(CoreError::InvalidGrid("kdv energy needs a 1-axis grid".into()));
    }
    let dphi = spectral::deriv(phi, 0, 1)?;
    let quarter = T::of(0.25);
    let q = dphi
        .try_zip_with(phi, |dp, p| quarter * (dp * dp - p * p * p))
        .expect("fields share one grid");
    Ok(q.integrate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use std::f64::consts::TAU;

    fn g1(n: usize) -> TorusGrid<f64> {
        TorusGrid::line_2pi(n).unwrap()
    }

    fn mode_coeff(phi: &SpectralField<f64>, idx: &[usize]) -> Complex<f64> {
        phi.to_spectrum().coeffs()[IxDyn(idx)]
    }

    #[test]
    fn kdv_linear_phase_is_exact_at_tiny_amplitude() {
        // mode k rotates by e^{i k^3 t / 2}; at a = 1e-4 the nonlinear
        // feedback onto mode 1 is O(a^2) relative
        let g = g1(64);
        let a = 1e-4;
        let phi0 = SpectralField::from_fn(&g, |x| a * x[0].cos());
        let solver = DispersiveSolver::new(WaveKind::Kdv, &g).unwrap();
        let dt = 1e-2;
        let traj = solver.evolve(&phi0, dt, 100, 100).unwrap();
        let t = 1.0;
        let c0 = mode_coeff(&phi0, &[1]);
        let c1 = mode_coeff(traj.states.last().unwrap(), &[1]);
        let rotated = c0 * Complex::from_polar(1.0, 0.5 * t);
        let phase_err = (c1 / rotated).arg().abs();
        assert!(phase_err < 1e-7, "phase error {phase_err}");
        assert!((c1.norm() / c0.norm() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn kdv_conserves_mass_exactly_and_l2_tightly() {
        let g = g1(128);
        let phi0 = SpectralField::from_fn(&g, |x| 0.5 * x[0].cos());
        let solver = DispersiveSolver::new(WaveKind::Kdv, &g).unwrap();
        let traj = solver.evolve(&phi0, 5e-3, 200, 200).unwrap();
        let end = traj.states.last().unwrap();
        assert!(mass(end).abs() < 1e-13);
        let drift = (l2_squared(end) - l2_squared(&phi0)).abs() / l2_squared(&phi0);
        assert!(drift < 1e-10, "l2 drift {drift}");
    }

    #[test]
    fn kdv_hamiltonian_drifts_slowly() {
        let g = g1(128);
        let phi0 = SpectralField::from_fn(&g, |x| 0.5 * x[0].cos());
        let solver = DispersiveSolver::new(WaveKind::Kdv, &g).unwrap();
        let traj = solver.evolve(&phi0, 5e-3, 200, 200).unwrap();
        let h0 = kdv_hamiltonian(&phi0).unwrap();
        let h1 = kdv_hamiltonian(traj.states.last().unwrap()).unwrap();
        assert!(((h1 - h0) / h0).abs() < 1e-8);
    }

    #[test]
    fn kdv_self_convergence_is_fourth_order() {
        let g = g1(64);
        let phi0 = SpectralField::from_fn(&g, |x| 0.5 * x[0].cos());
        let solver = DispersiveSolver::new(WaveKind::Kdv, &g).unwrap();
        let t_end = 0.5;
        let err = |steps: usize| {
            let a = solver.evolve(&phi0, t_end / steps as f64, steps, steps).unwrap();
            let b = solver
                .evolve(&phi0, t_end / (2 * steps) as f64, 2 * steps, 2 * steps)
                .unwrap();
            a.states
                .last()
                .unwrap()
                .try_sub(b.states.last().unwrap())
                .unwrap()
                .linf_norm()
        };
        let e1 = err(25);
        let e2 = err(50);
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.3, "order {order}");
    }

    #[test]
    fn rates_are_time_derivatives() {
        let g = g1(64);
        let phi0 = SpectralField::from_fn(&g, |x| 0.5 * x[0].cos());
        let solver = DispersiveSolver::new(WaveKind::Kdv, &g).unwrap();
        let dt = 1e-2;
        let traj = solver.evolve(&phi0, dt, 2, 1).unwrap();
        let centered = traj.states[2]
            .try_sub(&traj.states[0])
            .unwrap()
            .scaled(1.0 / (2.0 * dt));
        let diff = centered.try_sub(&traj.rates[1]).unwrap().linf_norm();
        assert!(diff < 5e-4, "rate mismatch {diff}");
    }

    #[test]
    fn zk_rhs_reduces_to_its_1d_form_on_transverse_constant_data() {
        let g = TorusGrid::new(&[(64, TAU), (8, TAU)]).unwrap();
        let phi = SpectralField::from_fn(&g, |x| 0.3 * x[0].cos() + 0.1 * (2.0 * x[0]).sin());
        let solver = DispersiveSolver::new(WaveKind::Zk, &g).unwrap();
        let rhs = solver.rhs(&phi).unwrap();
        let conv = spectral::product_dealiased(&phi, &spectral::deriv(&phi, 0, 1).unwrap()).unwrap();
        let mut expect = spectral::deriv(&phi, 0, 3).unwrap().scaled(-0.5);
        expect.add_scaled(-1.0, &conv).unwrap();
        assert!(rhs.try_sub(&expect).unwrap().linf_norm() < 1e-12);
    }

    #[test]
    fn zk_single_mode_phase_rotation() {
        // theta(1,1,1) = 1 * (1 + 2*2) / 2 = 2.5
        let g = TorusGrid::new(&[(16, TAU), (16, TAU), (16, TAU)]).unwrap();
        let a = 1e-5;
        let phi0 = SpectralField::from_fn(&g, |x| a * (x[0] + x[1] + x[2]).cos());
        let solver = DispersiveSolver::new(WaveKind::Zk, &g).unwrap();
        let traj = solver.evolve(&phi0, 1e-2, 10, 10).unwrap();
        let c0 = mode_coeff(&phi0, &[1, 1, 1]);
        let c1 = mode_coeff(traj.states.last().unwrap(), &[1, 1, 1]);
        let rotated = c0 * Complex::from_polar(1.0, 2.5 * 0.1);
        assert!((c1 - rotated).norm() < 1e-10 * c0.norm());
    }

    #[test]
    fn kpii_single_mode_phase_rotation() {
        // theta(1,2) = 1/2 - 4/2 = -1.5
        let g = TorusGrid::new(&[(32, TAU), (32, TAU)]).unwrap();
        let a = 1e-5;
        let phi0 = SpectralField::from_fn(&g, |x| a * (x[0] + 2.0 * x[1]).cos());
        let solver = DispersiveSolver::new(WaveKind::KpII, &g).unwrap();
        let traj = solver.evolve(&phi0, 1e-2, 10, 10).unwrap();
        let c0 = mode_coeff(&phi0, &[1, 2]);
        let c1 = mode_coeff(traj.states.last().unwrap(), &[1, 2]);
        let rotated = c0 * Complex::from_polar(1.0, -1.5 * 0.1);
        assert!((c1 - rotated).norm() < 1e-10 * c0.norm());
    }

    #[test]
    fn kpii_rejects_data_with_x1_line_mean() {
        let g = TorusGrid::new(&[(16, TAU), (16, TAU)]).unwrap();
        let phi0 = SpectralField::from_fn(&g, |x| 0.1 * x[1].cos());
        let solver = DispersiveSolver::new(WaveKind::KpII, &g).unwrap();
        assert!(matches!(
            solver.evolve(&phi0, 1e-2, 1, 1),
            Err(CoreError::Invalid(_))
        ));
    }

    #[test]
    fn kpii_step_matches_kdv_on_x2_independent_data() {
        let g2 = TorusGrid::new(&[(64, TAU), (8, TAU)]).unwrap();
        let g1d = g1(64);
        let profile = |x: f64| 0.4 * x.cos() + 0.2 * (2.0 * x).sin();
        let phi2 = SpectralField::from_fn(&g2, |x| profile(x[0]));
        let phi1 = SpectralField::from_fn(&g1d, |x| profile(x[0]));
        let kp = DispersiveSolver::new(WaveKind::KpII, &g2).unwrap();
        let kdv = DispersiveSolver::new(WaveKind::Kdv, &g1d).unwrap();
        let dt = 1e-2;
        let out2 = kp.step(&phi2, dt).unwrap();
        let out1 = kdv.step(&phi1, dt).unwrap();
        let lifted = SpectralField::from_fn(&g2, |_| 0.0);
        let mut lifted = lifted;
        {
            let n1 = g1d.len(0);
            let vals1 = out1.as_slice().to_vec();
            let v = lifted.values_mut();
            for (idx, val) in v.indexed_iter_mut() {
                *val = vals1[idx[0] % n1];
            }
        }
        assert!(out2.try_sub(&lifted).unwrap().linf_norm() < 1e-10);
    }

    #[test]
    fn blow_up_is_detected() {
        let g = g1(64);
        let phi0 = SpectralField::from_fn(&g, |x| 5.0 * x[0].cos());
        let solver = DispersiveSolver::new(WaveKind::Kdv, &g).unwrap();
        let out = solver.evolve(&phi0, 0.5, 200, 200);
        assert!(matches!(out, Err(CoreError::BlowUp { .. })), "expected blow-up");
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let g = g1(16);
        assert!(DispersiveSolver::new(WaveKind::KpII, &g).is_err());
        let g3 = TorusGrid::new(&[(8, TAU), (8, TAU), (8, TAU)]).unwrap();
        assert!(DispersiveSolver::new(WaveKind::Kdv, &g3).is_err());
    }
}
