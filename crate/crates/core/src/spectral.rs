//! Fourier calculus on periodic fields: derivatives, antiderivatives,
//! dealiased products, and phase-shift interpolation.
//!
//! Conventions:
//! - odd-order derivatives zero the Nyquist bin (its sign is ambiguous for
//!   real data), even orders keep it;
//! - `antideriv` inverts d/dx on the zero-mean part and errors if the input
//!   carries a mean along the axis, since no periodic antiderivative exists;
//! - `product_dealiased` applies the 2/3 rule to both factors and to the
//!   product, so quadratic nonlinearities are alias-free;
//! - `interp_periodic(f, axis, s)` returns `g(x) = f(x + s)`; the Nyquist
//!   bin is attenuated by cos(k s) to keep the output real.

use crate::error::{CoreError, Result};
use crate::field::{fft_along_axis, SpectralField};
use crate::fft;
use crate::scalar::Real;
use ndarray::{Axis, Zip};
use num_complex::Complex;

/// Multiplier table for one axis: (i k)^order with the Nyquist convention.
fn deriv_multipliers<T: Real>(k: &[T], order: usize) -> Vec<Complex<T>> {
    let n = k.len();
    k.iter()
        .enumerate()
        .map(|(j, &kj)| {
            if order % 2 == 1 && j == n / 2 {
                return Complex::new(T::zero(), T::zero());
            }
            let mag = kj.powi(order as i32);
            match order % 4 {
                0 => Complex::new(mag, T::zero()),
                1 => Complex::new(T::zero(), mag),
                2 => Complex::new(-mag, T::zero()),
                _ => Complex::new(T::zero(), -mag),
            }
        })
        .collect()
}

fn apply_line_multipliers<T: Real>(f: &SpectralField<T>, axis: usize, table: &[Complex<T>]) -> SpectralField<T> {
    let mut coeffs = f.values().mapv(|x| Complex::new(x, T::zero()));
    fft_along_axis(&mut coeffs, axis, true);
    Zip::from(coeffs.lanes_mut(Axis(axis))).par_for_each(|mut lane| {
        for (c, &m) in lane.iter_mut().zip(table.iter()) {
            *c = *c * m;
        }
    });
    fft_along_axis(&mut coeffs, axis, false);
    SpectralField::from_values(f.grid(), coeffs.mapv(|c| c.re)).expect("shape preserved")
}

/// Spectral partial derivative of the given order along `axis`.
pub fn deriv<T: Real>(f: &SpectralField<T>, axis: usize, order: usize) -> Result<SpectralField<T>> {
    if axis >= f.grid().ndim() {
        return Err(CoreError::Invalid(format!("axis {axis} out of range")));
    }
    if order == 0 {
        return Ok(f.clone());
    }
    let table = deriv_multipliers(&f.grid().wavenumbers(axis), order);
    Ok(apply_line_multipliers(f, axis, &table))
}

/// Gradient: first derivative along every axis.
pub fn gradient<T: Real>(f: &SpectralField<T>) -> Result<Vec<SpectralField<T>>> {
    (0..f.grid().ndim()).map(|a| deriv(f, a, 1)).collect()
}

/// Weighted Laplacian: sum_i w_i d^2/dx_i^2.
pub fn laplacian<T: Real>(f: &SpectralField<T>, weights: &[T]) -> Result<SpectralField<T>> {
    if weights.len() != f.grid().ndim() {
        return Err(CoreError::Invalid("laplacian weight count != ndim".into()));
    }
    let mut acc = SpectralField::zeros(f.grid());
    for (a, &w) in weights.iter().enumerate() {
        acc.add_scaled(w, &deriv(f, a, 2)?)?;
    }
    Ok(acc)
}

/// Relative tolerance on the along-axis line mean below which a field counts
/// as mean-free for `antideriv`.
pub const MEAN_FREE_TOL: f64 = 1.0e-12;

fn antideriv_impl<T: Real>(
    f: &SpectralField<T>,
    axis: usize,
    project: bool,
) -> Result<(SpectralField<T>, T)> {
    if axis >= f.grid().ndim() {
        return Err(CoreError::Invalid(format!("axis {axis} out of range")));
    }
    let n = f.grid().len(axis);
    let k = f.grid().wavenumbers(axis);
    let scale = {
        let m = f.linf_norm();
        if m > T::one() {
            m
        } else {
            T::one()
        }
    };
    let tol = T::of(MEAN_FREE_TOL) * scale;

    let mut coeffs = f.values().mapv(|x| Complex::new(x, T::zero()));
    fft_along_axis(&mut coeffs, axis, true);

    // Track the largest per-line mean; it is the obstruction to a periodic
    // antiderivative along this axis.
    let mut max_mean = T::zero();
    for lane in coeffs.lanes_mut(Axis(axis)) {
        let mean = lane[0].norm() / T::of(n as f64);
        if mean > max_mean {
            max_mean = mean;
        }
    }
    if !project && max_mean > tol {
        return Err(CoreError::MeanObstruction {
            axis,
            magnitude: max_mean.to_f64(),
            tol: tol.to_f64(),
        });
    }

    let k_ref = &k;
    Zip::from(coeffs.lanes_mut(Axis(axis))).par_for_each(|mut lane| {
        for (j, c) in lane.iter_mut().enumerate() {
            if j == 0 || j == n / 2 {
                *c = Complex::new(T::zero(), T::zero());
            } else {
                // divide by ik
                *c = Complex::new(c.im / k_ref[j], -c.re / k_ref[j]);
            }
        }
    });
    fft_along_axis(&mut coeffs, axis, false);
    let out = SpectralField::from_values(f.grid(), coeffs.mapv(|c| c.re)).expect("shape preserved");
    Ok((out, max_mean))
}

/// Periodic antiderivative along `axis`, normalized to zero mean per line.
/// Errors if any line mean exceeds `MEAN_FREE_TOL` (relative).
pub fn antideriv<T: Real>(f: &SpectralField<T>, axis: usize) -> Result<SpectralField<T>> {
    antideriv_impl(f, axis, false).map(|(g, _)| g)
}

/// Like [`antideriv`] but projects out the per-line mean instead of failing,
/// returning the magnitude of the largest removed mean. Callers use this
/// where the continuum equations carry a genuine compatibility defect that
/// must be measured rather than hidden.
pub fn antideriv_projected<T: Real>(f: &SpectralField<T>, axis: usize) -> Result<(SpectralField<T>, T)> {
    antideriv_impl(f, axis, true)
}

/// 2/3-rule band projection of a single field (all axes).
pub fn dealias<T: Real>(f: &SpectralField<T>) -> SpectralField<T> {
    let mut s = f.to_spectrum();
    s.dealias();
    s.to_field()
}

/// Alias-free pointwise product: both factors and the result are projected
/// onto the 2/3 band.
pub fn product_dealiased<T: Real>(f: &SpectralField<T>, g: &SpectralField<T>) -> Result<SpectralField<T>> {
    f.grid().same_grid(g.grid())?;
    let ft = dealias(f);
    let gt = dealias(g);
    let raw = ft.try_zip_with(&gt, |a, b| a * b)?;
    Ok(dealias(&raw))
}

/// Phase table for a uniform shift: `g(x) = f(x + s)` multiplies mode k by
/// e^{i k s}; the Nyquist bin gets cos(k s) so real data stays real.
pub fn phase_table<T: Real>(k: &[T], shift: T) -> Vec<Complex<T>> {
    let n = k.len();
    k.iter()
        .enumerate()
        .map(|(j, &kj)| {
            let angle = kj * shift;
            if j == n / 2 {
                Complex::new(angle.cos(), T::zero())
            } else {
                Complex::new(angle.cos(), angle.sin())
            }
        })
        .collect()
}

/// Applies a precomputed phase table to one real line in place.
/// `buf` is caller-provided scratch of the line length.
pub fn apply_phase_line<T: Real>(line: &mut [T], table: &[Complex<T>], buf: &mut Vec<Complex<T>>) {
    buf.clear();
    buf.extend(line.iter().map(|&x| Complex::new(x, T::zero())));
    fft::forward(buf);
    for (c, &m) in buf.iter_mut().zip(table.iter()) {
        *c = *c * m;
    }
    fft::inverse_scaled(buf);
    for (dst, c) in line.iter_mut().zip(buf.iter()) {
        *dst = c.re;
    }
}

/// Trigonometric interpolation of a uniform shift: returns `g(x) = f(x + s)`
/// along `axis`. An l2 isometry on the non-Nyquist band.
pub fn interp_periodic<T: Real>(f: &SpectralField<T>, axis: usize, shift: T) -> Result<SpectralField<T>> {
    if axis >= f.grid().ndim() {
        return Err(CoreError::Invalid(format!("axis {axis} out of range")));
    }
    let table = phase_table(&f.grid().wavenumbers(axis), shift);
    Ok(apply_line_multipliers(f, axis, &table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;

    fn g1(n: usize) -> TorusGrid<f64> {
        TorusGrid::line_2pi(n).unwrap()
    }

    fn close(a: &SpectralField<f64>, b: &SpectralField<f64>, tol: f64) {
        assert!(a.try_sub(b).unwrap().linf_norm() < tol, "fields differ beyond {tol}");
    }

    #[test]
    fn first_derivative_of_sin_is_cos() {
        let g = g1(32);
        let f = SpectralField::from_fn(&g, |x| x[0].sin());
        let d = deriv(&f, 0, 1).unwrap();
        close(&d, &SpectralField::from_fn(&g, |x| x[0].cos()), 1e-12);
    }

    #[test]
    fn third_derivative_of_cos_3x_is_27_sin_3x() {
        let g = g1(64);
        let f = SpectralField::from_fn(&g, |x| (3.0 * x[0]).cos());
        let d = deriv(&f, 0, 3).unwrap();
        close(&d, &SpectralField::from_fn(&g, |x| 27.0 * (3.0 * x[0]).sin()), 1e-10);
    }

    #[test]
    fn odd_derivative_of_nyquist_mode_vanishes() {
        let g = g1(16);
        let f = SpectralField::from_fn(&g, |x| (8.0 * x[0]).cos());
        let d = deriv(&f, 0, 1).unwrap();
        assert!(d.linf_norm() < 1e-12);
    }

    #[test]
    fn antideriv_round_trips_zero_mean_fields() {
        let g = g1(48);
        let f = SpectralField::from_fn(&g, |x| x[0].sin() - 0.25 * (4.0 * x[0]).cos());
        let back = deriv(&antideriv(&f, 0).unwrap(), 0, 1).unwrap();
        close(&back, &f, 1e-11);
        // And the other composition order, up to the (zero) mean.
        let back2 = antideriv(&deriv(&f, 0, 1).unwrap(), 0).unwrap();
        close(&back2, &f, 1e-11);
    }

    #[test]
    fn antideriv_of_cos_kx_is_sin_kx_over_k() {
        let g = g1(32);
        let f = SpectralField::from_fn(&g, |x| (2.0 * x[0]).cos());
        let a = antideriv(&f, 0).unwrap();
        close(&a, &SpectralField::from_fn(&g, |x| 0.5 * (2.0 * x[0]).sin()), 1e-12);
    }

    #[test]
    fn antideriv_rejects_mean_bearing_input() {
        let g = g1(16);
        let f = SpectralField::from_fn(&g, |x| 0.5 + x[0].sin());
        match antideriv(&f, 0) {
            Err(CoreError::MeanObstruction { axis: 0, .. }) => {}
            other => panic!("expected MeanObstruction, got {other:?}"),
        }
    }

    #[test]
    fn antideriv_projected_reports_removed_mean() {
        let g = g1(16);
        let f = SpectralField::from_fn(&g, |x| 0.5 + x[0].sin());
        let (a, removed) = antideriv_projected(&f, 0).unwrap();
        assert!((removed - 0.5).abs() < 1e-12);
        close(&a, &SpectralField::from_fn(&g, |x| -x[0].cos()), 1e-12);
    }

    #[test]
    fn dealiased_square_of_band_edge_cosine_keeps_only_constant() {
        let g = g1(24); // cap = 7: squaring the edge mode must not alias back in
        let kmax = 7.0;
        let f = SpectralField::from_fn(&g, |x| (kmax * x[0]).cos());
        let p = product_dealiased(&f, &f).unwrap();
        close(&p, &SpectralField::from_fn(&g, |_| 0.5), 1e-12);
    }

    #[test]
    fn product_with_one_dealiases_the_other_factor() {
        let g = g1(12); // cap = 3
        let one = SpectralField::from_fn(&g, |_| 1.0);
        let f = SpectralField::from_fn(&g, |x| (2.0 * x[0]).sin() + (5.0 * x[0]).cos());
        let p = product_dealiased(&one, &f).unwrap();
        close(&p, &SpectralField::from_fn(&g, |x| (2.0 * x[0]).sin()), 1e-12);
    }

    #[test]
    fn product_commutes_bitwise() {
        let g = g1(32);
        let f = SpectralField::from_fn(&g, |x| x[0].sin() + 0.3);
        let h = SpectralField::from_fn(&g, |x| (2.0 * x[0]).cos() - 0.1 * x[0].sin());
        let fg = product_dealiased(&f, &h).unwrap();
        let gf = product_dealiased(&h, &f).unwrap();
        assert_eq!(fg.as_slice(), gf.as_slice());
    }

    #[test]
    fn shift_sin_by_half_pi_gives_cos() {
        let g = g1(32);
        let f = SpectralField::from_fn(&g, |x| x[0].sin());
        let s = interp_periodic(&f, 0, std::f64::consts::FRAC_PI_2).unwrap();
        close(&s, &SpectralField::from_fn(&g, |x| x[0].cos()), 1e-12);
    }

    #[test]
    fn shift_by_half_cell_is_an_l2_isometry_on_band_limited_data() {
        let g = g1(32);
        let f = SpectralField::from_fn(&g, |x| x[0].sin() + 0.7 * (5.0 * x[0]).cos());
        let s = interp_periodic(&f, 0, 0.5 * g.spacing(0)).unwrap();
        assert!((s.l2_norm() - f.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn multi_axis_derivatives_commute() {
        let g = TorusGrid::new(&[(16, 2.0 * std::f64::consts::PI), (16, 2.0 * std::f64::consts::PI)]).unwrap();
        let f = SpectralField::from_fn(&g, |x| (x[0] + 2.0 * x[1]).sin());
        let dxy = deriv(&deriv(&f, 0, 1).unwrap(), 1, 1).unwrap();
        let dyx = deriv(&deriv(&f, 1, 1).unwrap(), 0, 1).unwrap();
        close(&dxy, &dyx, 1e-11);
    }
}
