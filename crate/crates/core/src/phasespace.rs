//! Phase-space grids, distribution fields, velocity moments, and
//! well-prepared near-monokinetic initial data.
//!
//! Space is periodic (a [`TorusGrid`]); velocity is a bounded uniform grid
//! with nodes at cell centers, so velocity integrals are midpoint sums.
//! A distribution is stored with spatial axes first, velocity axes last.
//!
//! Prepared data takes the form
//! `f(x,v) = rho0(x) prod_a g(v_a; u_a(x), theta0 sqrt(eps))`
//! with `g` a Gaussian of the stated mean and variance, `u` the modulated
//! velocity profile of the chosen scaling, and `rho0` matched to the active
//! Poisson law so the target potential solves it exactly. The variance rule
//! makes the kinetic part of the modulated energy equal `(d/2) theta0
//! sqrt(eps) mass` at t = 0 while the field parts vanish.

use crate::correctors::CorrectorSet;
use crate::error::{CoreError, Result};
use crate::field::SpectralField;
use crate::grid::TorusGrid;
use crate::poisson::{anisotropy_weights, ChargeLaw};
use crate::scalar::{pairwise_map_sum, pairwise_zip_sum, Real};
use crate::spectral::deriv;
use ndarray::{ArrayD, ArrayViewMut1, Axis, IxDyn, Zip};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocityAxis<T> {
    pub n: usize,
    pub min: T,
    pub max: T,
}

impl<T: Real> VelocityAxis<T> {
    pub fn new(n: usize, min: T, max: T) -> Result<Self> {
        if n < 8 {
            return Err(CoreError::InvalidGrid(format!(
                "velocity axis needs at least 8 cells, got {n}"
            )));
        }
        if !(min < max) {
            return Err(CoreError::InvalidGrid(format!(
                "velocity bounds must satisfy min < max, got [{min}, {max}]"
            )));
        }
        Ok(Self { n, min, max })
    }

    pub fn spacing(&self) -> T {
        (self.max - self.min) / T::of(self.n as f64)
    }

    /// Cell-center node, so sums over nodes are midpoint quadrature.
    pub fn node(&self, j: usize) -> T {
        self.min + (T::of(j as f64) + T::of(0.5)) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|j| self.node(j)).collect()
    }
}

/// Margin rule for velocity bounds: eight thermal widths beyond the bulk
/// velocity range, so the Gaussian tail at the boundary is below 1e-14.
pub fn velocity_extent<T: Real>(u_min: T, u_max: T, sigma: T) -> (T, T) {
    let margin = T::of(8.0) * sigma;
    (u_min - margin, u_max + margin)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid<T> {
    pub space: TorusGrid<T>,
    pub velocity: Vec<VelocityAxis<T>>,
}

impl<T: Real> PhaseGrid<T> {
    pub fn new(space: TorusGrid<T>, velocity: Vec<VelocityAxis<T>>) -> Result<Self> {
        if space.ndim() > 2 {
            return Err(CoreError::InvalidGrid(
                "kinetic runs support 1 or 2 spatial axes".into(),
            ));
        }
        if velocity.len() != space.ndim() {
            return Err(CoreError::InvalidGrid(format!(
                "{} velocity axes for {} spatial axes",
                velocity.len(),
                space.ndim()
            )));
        }
        Ok(Self { space, velocity })
    }

    pub fn ndim_v(&self) -> usize {
        self.velocity.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        let mut s: Vec<usize> = (0..self.space.ndim()).map(|a| self.space.len(a)).collect();
        s.extend(self.velocity.iter().map(|v| v.n));
        s
    }

    pub fn space_points(&self) -> usize {
        self.space.total_points()
    }

    pub fn velocity_points(&self) -> usize {
        self.velocity.iter().map(|v| v.n).product()
    }

    /// Product of velocity spacings: the midpoint quadrature weight.
    pub fn v_cell_volume(&self) -> T {
        self.velocity
            .iter()
            .fold(T::one(), |acc, v| acc * v.spacing())
    }
}

#[derive(Clone, Debug)]
pub struct DistributionField<T: Real> {
    grid: PhaseGrid<T>,
    values: ArrayD<T>,
}

#[derive(Clone, Debug)]
pub struct MomentSet<T: Real> {
    /// Charge density: velocity integral of f.
    pub rho: SpectralField<T>,
    /// Current: velocity integral of v_a f, one field per velocity axis.
    pub current: Vec<SpectralField<T>>,
    /// Diagonal second moments: velocity integral of v_a^2 f.
    pub second: Vec<SpectralField<T>>,
}

impl<T: Real> DistributionField<T> {
    pub fn zeros(grid: &PhaseGrid<T>) -> Self {
        let values = ArrayD::zeros(IxDyn(&grid.shape()));
        Self { grid: grid.clone(), values }
    }

    pub fn from_fn(grid: &PhaseGrid<T>, f: impl Fn(&[T], &[T]) -> T) -> Self {
        let dx = grid.space.ndim();
        let xnodes: Vec<Vec<T>> = (0..dx).map(|a| grid.space.nodes(a)).collect();
        let vnodes: Vec<Vec<T>> = grid.velocity.iter().map(|v| v.nodes()).collect();
        let mut out = Self::zeros(grid);
        let mut xbuf = vec![T::zero(); dx];
        let mut vbuf = vec![T::zero(); grid.ndim_v()];
        for (idx, val) in out.values.indexed_iter_mut() {
            for a in 0..dx {
                xbuf[a] = xnodes[a][idx[a]];
            }
            for a in 0..vnodes.len() {
                vbuf[a] = vnodes[a][idx[dx + a]];
            }
            *val = f(&xbuf, &vbuf);
        }
        out
    }

    pub fn grid(&self) -> &PhaseGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &ArrayD<T> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut ArrayD<T> {
        &mut self.values
    }

    pub fn max_value(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, v| if *v > m { *v } else { m })
    }

    /// Total mass: the full phase-space integral of f.
    pub fn mass(&self) -> T {
        let w = self.grid.space.cell_volume() * self.grid.v_cell_volume();
        pairwise_map_sum(self.values.as_slice().expect("standard layout"), |v| v) * w
    }

    /// Check the standing invariants: nonnegativity, positive mass, and
    /// vanishing values on every velocity boundary slab.
    pub fn validate(&self) -> Result<()> {
        let mut min = T::zero();
        for v in self.values.iter() {
            if !v.is_finite() {
                return Err(CoreError::NonFinite { what: "distribution".into() });
            }
            if *v < min {
                min = *v;
            }
        }
        if min < T::zero() {
            return Err(CoreError::Invalid(format!(
                "distribution has negative values, min {min:e}"
            )));
        }
        if !(self.mass() > T::zero()) {
            return Err(CoreError::Invalid("distribution has no mass".into()));
        }
        let cap = T::of(1e-12) * self.max_value();
        let dx = self.grid.space.ndim();
        for (a, vax) in self.grid.velocity.iter().enumerate() {
            let ax = Axis(dx + a);
            for slab in [0, vax.n - 1] {
                let view = self.values.index_axis(ax, slab);
                let worst = view.iter().fold(T::zero(), |m, v| m.max(v.abs()));
                if worst > cap {
                    return Err(CoreError::Invalid(format!(
                        "distribution does not vanish at the velocity boundary: \
                         axis {a} slab {slab} holds {worst:e} against cap {cap:e}; \
                         widen the velocity extent"
                    )));
                }
            }
        }
        Ok(())
    }

    /// View with all spatial axes flattened into rows and all velocity axes
    /// flattened into columns. Valid because the storage is C-order with
    /// spatial axes leading.
    fn as_rows(&self) -> ndarray::ArrayView2<'_, T> {
        let nx = self.grid.space_points();
        let nv = self.grid.velocity_points();
        self.values
            .view()
            .into_shape_with_order((nx, nv))
            .expect("contiguous phase-space storage")
    }
}

/// Velocity moments by midpoint quadrature, parallel over spatial rows
/// with a fixed per-row summation order.
pub fn moments<T: Real>(f: &DistributionField<T>) -> MomentSet<T> {
    let grid = f.grid();
    let d = grid.ndim_v();
    let nx = grid.space_points();
    let nv = grid.velocity_points();
    // per-axis node value for every flattened velocity index
    let mut vnode = vec![vec![T::zero(); nv]; d];
    let mut strides = vec![1usize; d];
    for a in (0..d.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * grid.velocity[a + 1].n;
    }
    for jv in 0..nv {
        for a in 0..d {
            let ja = (jv / strides[a]) % grid.velocity[a].n;
            vnode[a][jv] = grid.velocity[a].node(ja);
        }
    }

    let rows = f.as_rows();
    let mut out = ndarray::Array2::<T>::zeros((nx, 1 + 2 * d));
    Zip::from(out.rows_mut())
        .and(rows.rows())
        .par_for_each(|mut orow: ArrayViewMut1<T>, frow| {
            let line = frow.to_slice().expect("contiguous row");
            orow[0] = pairwise_map_sum(line, |v| v);
            for a in 0..d {
                let nodes = &vnode[a];
                orow[1 + a] = pairwise_zip_sum(line, nodes, |v, n| v * n);
                orow[1 + d + a] = pairwise_zip_sum(line, nodes, |v, n| v * n * n);
            }
        });

    let w = grid.v_cell_volume();
    let shape: Vec<usize> = (0..grid.space.ndim()).map(|a| grid.space.len(a)).collect();
    let col = |c: usize| -> SpectralField<T> {
        let vals: Vec<T> = out.column(c).iter().map(|v| *v * w).collect();
        let arr = ArrayD::from_shape_vec(IxDyn(&shape), vals).expect("moment shape");
        SpectralField::from_values(&grid.space, arr).expect("moment grid")
    };
    let rho = col(0);
    let current = (0..d).map(|a| col(1 + a)).collect();
    let second = (0..d).map(|a| col(1 + d + a)).collect();
    MomentSet { rho, current, second }
}

/// Charge density alone: the velocity integral of f, cheaper than a full
/// [`moments`] pass. Used on the hot path of the kinetic stepper.
pub fn density<T: Real>(f: &DistributionField<T>) -> SpectralField<T> {
    let grid = f.grid();
    let nx = grid.space_points();
    let rows = f.as_rows();
    let mut out = vec![T::zero(); nx];
    Zip::from(
        ndarray::ArrayViewMut1::from(&mut out[..]),
    )
    .and(rows.rows())
    .par_for_each(|o, frow| {
        let line = frow.to_slice().expect("contiguous row");
        *o = pairwise_map_sum(line, |v| v);
    });
    let w = grid.v_cell_volume();
    let shape: Vec<usize> = (0..grid.space.ndim()).map(|a| grid.space.len(a)).collect();
    let arr = ArrayD::from_shape_vec(IxDyn(&shape), out.iter().map(|v| *v * w).collect())
        .expect("density shape");
    SpectralField::from_values(&grid.space, arr).expect("density grid")
}

/// Off-diagonal second moment: the velocity integral of `v_a v_b f`.
/// Appears in the transverse momentum flux of the anisotropic scaling.
pub fn mixed_moment<T: Real>(f: &DistributionField<T>, a: usize, b: usize) -> SpectralField<T> {
    let grid = f.grid();
    let d = grid.ndim_v();
    assert!(a < d && b < d, "velocity axes out of range");
    let nx = grid.space_points();
    let nv = grid.velocity_points();
    let mut strides = vec![1usize; d];
    for ax in (0..d.saturating_sub(1)).rev() {
        strides[ax] = strides[ax + 1] * grid.velocity[ax + 1].n;
    }
    let mut prod = vec![T::zero(); nv];
    for (jv, p) in prod.iter_mut().enumerate() {
        let ja = (jv / strides[a]) % grid.velocity[a].n;
        let jb = (jv / strides[b]) % grid.velocity[b].n;
        *p = grid.velocity[a].node(ja) * grid.velocity[b].node(jb);
    }
    let rows = f.as_rows();
    let mut out = vec![T::zero(); nx];
    Zip::from(ndarray::ArrayViewMut1::from(&mut out[..]))
        .and(rows.rows())
        .par_for_each(|o, frow| {
            let line = frow.to_slice().expect("contiguous row");
            *o = pairwise_zip_sum(line, &prod, |v, p| v * p);
        });
    let w = grid.v_cell_volume();
    let shape: Vec<usize> = (0..grid.space.ndim()).map(|ax| grid.space.len(ax)).collect();
    let arr = ArrayD::from_shape_vec(IxDyn(&shape), out.iter().map(|v| *v * w).collect())
        .expect("moment shape");
    SpectralField::from_values(&grid.space, arr).expect("moment grid")
}

/// Density profile matched to the Poisson law: the target potential then
/// solves the discrete law exactly. Callers probing an amplitude can check
/// positivity here before paying for the full distribution.
pub fn matched_density<T: Real>(
    phi_t: &SpectralField<T>,
    eps: T,
    weights: &[T],
    law: ChargeLaw,
) -> Result<SpectralField<T>> {
    let mut rho0 = match law {
        ChargeLaw::Linearized => phi_t.scaled(eps).map(|v| T::one() + v),
        ChargeLaw::Boltzmann => phi_t.map(|v| (eps * v).exp()),
    };
    for (a, &w) in weights.iter().enumerate() {
        rho0.add_scaled(-(eps * eps) * w, &deriv(phi_t, a, 2)?)?;
    }
    Ok(rho0)
}

/// Build near-monokinetic initial data for the scaling the corrector set
/// belongs to: Gaussian in each velocity axis with variance
/// `theta0 sqrt(eps)` around the modulated velocity at the set's initial
/// time, density matched to the Poisson law, total mass renormalized to
/// the spatial integral of the matched density.
pub fn build_prepared_data<T: Real>(
    grid: &PhaseGrid<T>,
    eps: T,
    correctors: &CorrectorSet<T>,
    theta0: T,
    law: ChargeLaw,
) -> Result<DistributionField<T>> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(CoreError::Invalid(format!("eps must lie in (0,1), got {eps}")));
    }
    if !(theta0 > T::zero()) {
        return Err(CoreError::Invalid(format!("theta0 must be positive, got {theta0}")));
    }
    let sample = correctors
        .samples
        .first()
        .ok_or_else(|| CoreError::Invalid("empty corrector set".into()))?;
    sample.phi1.grid().same_grid(&grid.space)?;
    let d = grid.ndim_v();
    let u_mod = sample.modulated_velocity(eps);
    if u_mod.len() != d {
        return Err(CoreError::Invalid(format!(
            "{} modulated velocity components for {} velocity axes",
            u_mod.len(),
            d
        )));
    }
    let phi_t = sample.target_potential(eps);
    let weights = anisotropy_weights(correctors.kind, eps);
    let rho0 = matched_density(&phi_t, eps, &weights, law)?;
    let min_rho = rho0.min_value();
    if !(min_rho > T::zero()) {
        return Err(CoreError::NonPositiveDensity { min_rho: min_rho.to_f64() });
    }

    let variance = theta0 * eps.sqrt();
    let norm = T::one() / (T::TAU() * variance).sqrt();
    let half = T::of(0.5);

    let nx = grid.space_points();
    let nv = grid.velocity_points();
    let mut f = DistributionField::zeros(grid);
    {
        let mut rows = f
            .values
            .view_mut()
            .into_shape_with_order((nx, nv))
            .expect("contiguous phase-space storage");
        let u_slices: Vec<&[T]> = u_mod.iter().map(|u| u.as_slice()).collect();
        let rho_slice = rho0.as_slice();
        let nodes: Vec<Vec<T>> = grid.velocity.iter().map(|v| v.nodes()).collect();
        let mut strides = vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * grid.velocity[a + 1].n;
        }
        Zip::indexed(rows.rows_mut()).par_for_each(|ix, mut row| {
            for jv in 0..nv {
                let mut g = rho_slice[ix];
                for a in 0..d {
                    let ja = (jv / strides[a]) % grid.velocity[a].n;
                    let dv = nodes[a][ja] - u_slices[a][ix];
                    g *= norm * (-half * dv * dv / variance).exp();
                }
                row[jv] = g;
            }
        });
    }

    // renormalize the midpoint-quadrature mass to the exact spatial integral
    let target = rho0.integrate();
    let got = f.mass();
    if !(got > T::zero()) {
        return Err(CoreError::Invalid("prepared data lost all mass".into()));
    }
    let factor = target / got;
    for v in f.values.iter_mut() {
        *v *= factor;
    }
    f.validate()?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correctors::build_kdv;
    use crate::dispersive::{DispersiveSolver, WaveKind};
    use crate::poisson;
    use std::f64::consts::TAU;

    fn maxwellian_grid(nx: usize, nv: usize, vmax: f64) -> PhaseGrid<f64> {
        let space = TorusGrid::line_2pi(nx).unwrap();
        let vel = vec![VelocityAxis::new(nv, -vmax, vmax).unwrap()];
        PhaseGrid::new(space, vel).unwrap()
    }

    fn kdv_correctors(nx: usize, amp: f64) -> CorrectorSet<f64> {
        let g = TorusGrid::line_2pi(nx).unwrap();
        let phi0 = SpectralField::from_fn(&g, |x: &[f64]| amp * x[0].cos());
        let solver = DispersiveSolver::new(WaveKind::Kdv, &g).unwrap();
        let traj = solver.evolve(&phi0, 1e-3, 0, 1).unwrap();
        build_kdv(&traj).unwrap()
    }

    #[test]
    fn uniform_maxwellian_moments_match_gaussian_integrals() {
        let theta = 0.04f64;
        let grid = maxwellian_grid(16, 64, 8.0 * theta.sqrt());
        let f = DistributionField::from_fn(&grid, |_x, v| {
            (-(v[0] * v[0]) / (2.0 * theta)).exp() / (TAU * theta).sqrt()
        });
        let m = moments(&f);
        for v in m.rho.as_slice() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        for v in m.current[0].as_slice() {
            assert!(v.abs() < 1e-12);
        }
        for v in m.second[0].as_slice() {
            assert!((v - theta).abs() < 1e-12);
        }
        assert!((f.mass() - TAU).abs() < 1e-12);
    }

    #[test]
    fn moments_scale_exactly_with_the_distribution() {
        let grid = maxwellian_grid(8, 32, 2.0);
        let f = DistributionField::from_fn(&grid, |x, v| {
            (1.0 + 0.3 * x[0].cos()) * (-(v[0] - 0.2 * x[0].sin()).powi(2) / 0.1).exp()
        });
        let mut f2 = f.clone();
        for v in f2.values_mut().iter_mut() {
            *v *= 2.0;
        }
        let (a, b) = (moments(&f), moments(&f2));
        for (x, y) in a.rho.as_slice().iter().zip(b.rho.as_slice()) {
            assert_eq!(2.0 * x, *y);
        }
        for (x, y) in a.second[0].as_slice().iter().zip(b.second[0].as_slice()) {
            assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn cauchy_schwarz_holds_pointwise() {
        let grid = maxwellian_grid(16, 48, 3.0);
        let f = DistributionField::from_fn(&grid, |x, v| {
            let u = 0.4 * x[0].sin();
            (1.0 + 0.5 * x[0].cos()) * (-(v[0] - u).powi(2) / 0.2).exp()
        });
        let m = moments(&f);
        for i in 0..16 {
            let (r, j, s) =
                (m.rho.as_slice()[i], m.current[0].as_slice()[i], m.second[0].as_slice()[i]);
            assert!(j * j <= r * s + 1e-10);
        }
    }

    #[test]
    fn flat_prepared_data_is_a_uniform_maxwellian() {
        let set = kdv_correctors(16, 0.0);
        let eps = 0.01f64;
        let grid = maxwellian_grid(16, 128, 3.0);
        let f = build_prepared_data(&grid, eps, &set, 1.0, ChargeLaw::Linearized).unwrap();
        let m = moments(&f);
        for v in m.rho.as_slice() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        // raw second moment = variance since the bulk velocity vanishes
        let variance = eps.sqrt();
        for v in m.second[0].as_slice() {
            assert!((v - variance).abs() < 1e-10);
        }
        assert!((f.mass() - TAU).abs() < 1e-12);
    }

    #[test]
    fn single_mode_density_algebra() {
        // phi1 = 0.5 cos x, eps = 0.1, linearized law:
        // rho0 = 1 + eps*0.5 cos + eps^2*0.5 cos = 1 + 0.055 cos x
        let set = kdv_correctors(32, 0.5);
        let eps = 0.1f64;
        let grid = maxwellian_grid(32, 192, 6.0);
        let f = build_prepared_data(&grid, eps, &set, 1.0, ChargeLaw::Linearized).unwrap();
        let m = moments(&f);
        let g = TorusGrid::line_2pi(32).unwrap();
        let expect = SpectralField::from_fn(&g, |x: &[f64]| 1.0 + 0.055 * x[0].cos());
        let err = m.rho.try_sub(&expect).unwrap().linf_norm();
        assert!(err < 1e-10, "rho error {err}");
    }

    #[test]
    fn prepared_density_solves_the_poisson_law_exactly() {
        let set = kdv_correctors(32, 0.5);
        let eps = 0.1f64;
        let grid = maxwellian_grid(32, 192, 6.0);
        for law in [ChargeLaw::Linearized, ChargeLaw::Boltzmann] {
            let f = build_prepared_data(&grid, eps, &set, 1.0, law).unwrap();
            let m = moments(&f);
            let phi = poisson::solve(law, &m.rho, eps, &[1.0]).unwrap();
            let target = set.samples[0].target_potential(eps);
            let err = phi.try_sub(&target).unwrap().linf_norm();
            assert!(err < 1e-9, "{law:?} potential error {err}");
        }
    }

    #[test]
    fn overlarge_amplitude_is_rejected_with_the_minimum() {
        let set = kdv_correctors(32, 30.0);
        let grid = maxwellian_grid(32, 128, 40.0);
        let err = build_prepared_data(&grid, 0.1, &set, 1.0, ChargeLaw::Linearized).unwrap_err();
        match err {
            CoreError::NonPositiveDensity { min_rho } => assert!(min_rho < 0.0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn narrow_velocity_extent_is_rejected() {
        let set = kdv_correctors(16, 0.1);
        // sigma at eps=0.1 is ~0.56; a +-1 window leaves visible tails
        let grid = maxwellian_grid(16, 32, 1.0);
        assert!(build_prepared_data(&grid, 0.1, &set, 1.0, ChargeLaw::Linearized).is_err());
    }

    #[test]
    fn density_agrees_with_full_moments() {
        let grid = maxwellian_grid(16, 48, 3.0);
        let f = DistributionField::from_fn(&grid, |x, v| {
            (1.0 + 0.5 * x[0].cos()) * (-(v[0] - 0.3).powi(2) / 0.2).exp()
        });
        let m = moments(&f);
        let rho = density(&f);
        for (a, b) in rho.as_slice().iter().zip(m.rho.as_slice()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn mixed_moment_factors_on_separable_data() {
        let space = TorusGrid::new(&[(8, TAU), (8, TAU)]).unwrap();
        let vel = vec![
            VelocityAxis::new(32, -3.0, 3.0).unwrap(),
            VelocityAxis::new(24, -4.0, 4.0).unwrap(),
        ];
        let grid = PhaseGrid::new(space, vel).unwrap();
        let f = DistributionField::from_fn(&grid, |x, v| {
            (1.0 + 0.2 * x[0].cos())
                * (-(v[0] - 0.3).powi(2) / 0.2).exp()
                * (-(v[1] + 0.4 * x[1].sin()).powi(2) / 0.3).exp()
        });
        let m = moments(&f);
        let m12 = mixed_moment(&f, 0, 1);
        for i in 0..m12.as_slice().len() {
            let expect = m.current[0].as_slice()[i] * m.current[1].as_slice()[i]
                / m.rho.as_slice()[i];
            assert!((m12.as_slice()[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn velocity_extent_margin_rule() {
        let (lo, hi) = velocity_extent(-0.5f64, 0.5, 1.0);
        assert_eq!(lo, -8.5);
        assert_eq!(hi, 8.5);
    }
}
