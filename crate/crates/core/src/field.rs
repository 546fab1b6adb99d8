//! Real-valued fields on a [`TorusGrid`] and their complex spectra.
//!
//! A [`SpectralField`] owns an n-dimensional array whose shape matches the
//! grid. All binary operations check grid equality and fail loudly on
//! mismatch; there is no broadcasting.

use crate::error::{CoreError, Result};
use crate::fft;
use crate::grid::TorusGrid;
use crate::scalar::{pairwise_map_sum, pairwise_sum, Real};
use ndarray::{ArrayD, Axis, IxDyn, Zip};
use num_complex::Complex;

#[derive(Clone, Debug)]
pub struct SpectralField<T> {
    grid: TorusGrid<T>,
    values: ArrayD<T>,
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(grid: &TorusGrid<T>) -> Self {
        Self {
            grid: grid.clone(),
            values: ArrayD::zeros(IxDyn(&grid.shape())),
        }
    }

    /// Builds a field by evaluating `f` at the node coordinates.
    pub fn from_fn(grid: &TorusGrid<T>, f: impl Fn(&[T]) -> T) -> Self {
        let nodes: Vec<Vec<T>> = (0..grid.ndim()).map(|a| grid.nodes(a)).collect();
        let values = ArrayD::from_shape_fn(IxDyn(&grid.shape()), |idx| {
            let coords: Vec<T> = (0..nodes.len()).map(|a| nodes[a][idx[a]]).collect();
            f(&coords)
        });
        Self { grid: grid.clone(), values }
    }

    pub fn from_values(grid: &TorusGrid<T>, values: ArrayD<T>) -> Result<Self> {
        if values.shape() != grid.shape().as_slice() {
            return Err(CoreError::GridMismatch(format!(
                "values shape {:?} vs grid {:?}",
                values.shape(),
                grid.shape()
            )));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn grid(&self) -> &TorusGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &ArrayD<T> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut ArrayD<T> {
        &mut self.values
    }

    pub fn as_slice(&self) -> &[T] {
        self.values.as_slice().expect("field storage is contiguous")
    }

    pub fn as_slice_mut(&mut self) -> &mut [T] {
        self.values.as_slice_mut().expect("field storage is contiguous")
    }

    pub fn mean(&self) -> T {
        pairwise_sum(self.as_slice()) / T::of(self.grid.total_points() as f64)
    }

    /// Integral over the torus with the cell volume weight.
    pub fn integrate(&self) -> T {
        pairwise_sum(self.as_slice()) * self.grid.cell_volume()
    }

    /// sqrt( integral of f^2 ).
    pub fn l2_norm(&self) -> T {
        (pairwise_map_sum(self.as_slice(), |x| x * x) * self.grid.cell_volume()).sqrt()
    }

    pub fn linf_norm(&self) -> T {
        self.as_slice()
            .iter()
            .fold(T::zero(), |m, &x| if x.abs() > m { x.abs() } else { m })
    }

    pub fn min_value(&self) -> T {
        self.as_slice()
            .iter()
            .fold(T::infinity(), |m, &x| if x < m { x } else { m })
    }

    pub fn check_finite(&self, what: &str) -> Result<()> {
        if self.as_slice().iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(CoreError::NonFinite { what: what.to_string() })
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.mapv(|x| f(x)),
        }
    }

    pub fn scaled(&self, c: T) -> Self {
        self.map(|x| x * c)
    }

    pub fn try_zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.grid.same_grid(&other.grid)?;
        let mut out = self.clone();
        Zip::from(&mut out.values).and(&other.values).for_each(|a, &b| *a = f(*a, b));
        Ok(out)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.try_zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_zip_with(other, |a, b| a - b)
    }

    /// self += c * other, grid-checked.
    pub fn add_scaled(&mut self, c: T, other: &Self) -> Result<()> {
        self.grid.same_grid(&other.grid)?;
        Zip::from(&mut self.values).and(&other.values).for_each(|a, &b| *a = *a + c * b);
        Ok(())
    }

    /// L2 inner product: integral of self * other.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.grid.same_grid(&other.grid)?;
        Ok(crate::scalar::pairwise_zip_sum(self.as_slice(), other.as_slice(), |a, b| a * b)
            * self.grid.cell_volume())
    }

    /// Full complex spectrum (unnormalized-forward convention handled
    /// internally: coefficients are the discrete Fourier coefficients such
    /// that `to_field` reconstructs the values exactly).
    pub fn to_spectrum(&self) -> Spectrum<T> {
        let mut coeffs = self.values.mapv(|x| Complex::new(x, T::zero()));
        for a in 0..self.grid.ndim() {
            fft_along_axis(&mut coeffs, a, true);
        }
        Spectrum { grid: self.grid.clone(), coeffs }
    }
}

/// Complex N-dimensional spectrum of a real field.
#[derive(Clone, Debug)]
pub struct Spectrum<T> {
    grid: TorusGrid<T>,
    coeffs: ArrayD<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub(crate) fn from_parts(grid: TorusGrid<T>, coeffs: ArrayD<Complex<T>>) -> Self {
        Spectrum { grid, coeffs }
    }

    pub fn grid(&self) -> &TorusGrid<T> {
        &self.grid
    }

    pub fn coeffs(&self) -> &ArrayD<Complex<T>> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut ArrayD<Complex<T>> {
        &mut self.coeffs
    }

    /// Applies `f(k, c)` to every mode, where `k` is the wavenumber vector.
    pub fn map_modes(&mut self, f: impl Fn(&[T], &mut Complex<T>)) {
        let wavenumbers: Vec<Vec<T>> = (0..self.grid.ndim()).map(|a| self.grid.wavenumbers(a)).collect();
        let mut k = vec![T::zero(); self.grid.ndim()];
        for (idx, c) in self.coeffs.indexed_iter_mut() {
            for a in 0..wavenumbers.len() {
                k[a] = wavenumbers[a][idx[a]];
            }
            f(&k, c);
        }
    }

    /// Zeroes every mode with |m| > floor(n/3) on any axis (2/3 rule).
    pub fn dealias(&mut self) {
        let ndim = self.grid.ndim();
        let caps: Vec<usize> = (0..ndim).map(|a| self.grid.dealias_mode_cap(a)).collect();
        let ns: Vec<usize> = self.grid.shape();
        for (idx, c) in self.coeffs.indexed_iter_mut() {
            for a in 0..ndim {
                let j = idx[a];
                let m = if j < ns[a] / 2 { j } else { ns[a] - j };
                if m > caps[a] {
                    *c = Complex::new(T::zero(), T::zero());
                    break;
                }
            }
        }
    }

    /// Inverse transform, discarding the (roundoff-level) imaginary part.
    pub fn to_field(&self) -> SpectralField<T> {
        let mut coeffs = self.coeffs.clone();
        for a in 0..self.grid.ndim() {
            fft_along_axis(&mut coeffs, a, false);
        }
        SpectralField {
            grid: self.grid.clone(),
            values: coeffs.mapv(|c| c.re),
        }
    }
}

/// In-place FFT along one axis of a complex array (forward unnormalized,
/// inverse scaled by 1/n).
pub(crate) fn fft_along_axis<T: Real>(arr: &mut ArrayD<Complex<T>>, axis: usize, forward: bool) {
    let n = arr.shape()[axis];
    Zip::from(arr.lanes_mut(Axis(axis))).par_for_each(|mut lane| {
        let mut buf: Vec<Complex<T>> = lane.iter().copied().collect();
        if forward {
            fft::forward(&mut buf);
        } else {
            fft::inverse_scaled(&mut buf);
        }
        for (dst, src) in lane.iter_mut().zip(buf.iter()) {
            *dst = *src;
        }
    });
    debug_assert_eq!(n, arr.shape()[axis]);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize) -> TorusGrid<f64> {
        TorusGrid::line_2pi(n).unwrap()
    }

    #[test]
    fn from_fn_places_nodes_correctly() {
        let g = grid1(8);
        let f = SpectralField::from_fn(&g, |x| x[0]);
        let h = g.spacing(0);
        assert_eq!(f.as_slice()[3], 3.0 * h);
    }

    #[test]
    fn integrate_constant_gives_volume() {
        let g = TorusGrid::new(&[(16, 2.0 * std::f64::consts::PI), (8, 4.0)]).unwrap();
        let f = SpectralField::from_fn(&g, |_| 1.5);
        assert!((f.integrate() - 1.5 * g.volume()).abs() < 1e-12);
    }

    #[test]
    fn spectrum_roundtrip_is_exact_to_roundoff() {
        let g = TorusGrid::new(&[(16, 2.0 * std::f64::consts::PI), (12, 1.0)]).unwrap();
        let f = SpectralField::from_fn(&g, |x| (x[0].sin() + 1.3) * (2.0 * std::f64::consts::PI * x[1]).cos());
        let back = f.to_spectrum().to_field();
        let diff = f.try_sub(&back).unwrap();
        assert!(diff.linf_norm() < 1e-13);
    }

    #[test]
    fn parseval_holds_for_random_smooth_field() {
        let g = grid1(64);
        let f = SpectralField::from_fn(&g, |x| x[0].sin() + 0.5 * (3.0 * x[0]).cos());
        let spec = f.to_spectrum();
        let n = 64.0;
        let sum_sq_modes: f64 = spec.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>() / n;
        let sum_sq_phys: f64 = f.as_slice().iter().map(|x| x * x).sum();
        assert!((sum_sq_modes - sum_sq_phys).abs() < 1e-10 * sum_sq_phys.max(1.0));
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let a = SpectralField::zeros(&grid1(8));
        let b = SpectralField::zeros(&grid1(16));
        assert!(a.try_add(&b).is_err());
    }

    #[test]
    fn dealias_keeps_constant_removes_upper_third() {
        let g = grid1(12); // cap = 3
        let f = SpectralField::from_fn(&g, |x| 1.0 + (5.0 * x[0]).cos());
        let mut s = f.to_spectrum();
        s.dealias();
        let back = s.to_field();
        let expect = SpectralField::from_fn(&g, |_| 1.0);
        assert!(back.try_sub(&expect).unwrap().linf_norm() < 1e-13);
    }
}
