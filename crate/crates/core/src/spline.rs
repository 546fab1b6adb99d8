//! Uniform cubic-spline interpolation along a bounded velocity line.
//!
//! The semi-Lagrangian velocity advection evaluates each line of the
//! distribution at feet `v_j - a dt` with a per-line constant shift, so the
//! primitive here is: fit a cubic spline through the line values at integer
//! nodes `0..m-1`, then evaluate at all nodes shifted by a constant number
//! of cells. The velocity grid is bounded, not periodic; natural boundary
//! conditions (vanishing second derivative) are the default, with a clamped
//! option (vanishing first derivative).
//!
//! Feet outside the node range return 0: the distribution vanishes at the
//! velocity boundary by construction (eight-sigma margins), so the zero
//! extension is exact to that tolerance. Feet leaving the grid by more
//! than one cell indicate an unresolved acceleration and are an error.
//!
//! The spline interpolates node values exactly, so a zero shift is the
//! identity and a vanishing field stays a fixed point of the advection.

use crate::error::{CoreError, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SplineBoundary {
    #[default]
    Natural,
    Clamped,
}

/// Second-derivative values ("moments") of the interpolating cubic spline
/// through `values` at unit-spaced nodes.
pub fn fit_moments<T: Real>(values: &[T], boundary: SplineBoundary) -> Result<Vec<T>> {
    let m = values.len();
    if m < 4 {
        return Err(CoreError::Invalid(format!(
            "spline line needs at least 4 nodes, got {m}"
        )));
    }
    let six = T::of(6.0);
    let two = T::of(2.0);
    let four = T::of(4.0);
    // Thomas solve of the tridiagonal moment system.
    let mut diag = vec![four; m];
    let mut rhs = vec![T::zero(); m];
    for j in 1..m - 1 {
        rhs[j] = six * (values[j + 1] - two * values[j] + values[j - 1]);
    }
    match boundary {
        SplineBoundary::Natural => {
            // M_0 = M_{m-1} = 0: fold into the first and last interior rows.
            diag[0] = T::one();
            diag[m - 1] = T::one();
            rhs[0] = T::zero();
            rhs[m - 1] = T::zero();
        }
        SplineBoundary::Clamped => {
            diag[0] = two;
            diag[m - 1] = two;
            rhs[0] = six * (values[1] - values[0]);
            rhs[m - 1] = -six * (values[m - 1] - values[m - 2]);
        }
    }
    // sub/super-diagonals are 1 except where a natural end decouples
    let lower = |j: usize| -> T {
        if boundary == SplineBoundary::Natural && j == m - 1 {
            T::zero()
        } else {
            T::one()
        }
    };
    let upper = |j: usize| -> T {
        if boundary == SplineBoundary::Natural && j == 0 {
            T::zero()
        } else {
            T::one()
        }
    };
    let mut cp = vec![T::zero(); m];
    cp[0] = upper(0) / diag[0];
    rhs[0] = rhs[0] / diag[0];
    for j in 1..m {
        let w = diag[j] - lower(j) * cp[j - 1];
        if j < m - 1 {
            cp[j] = upper(j) / w;
        }
        rhs[j] = (rhs[j] - lower(j) * rhs[j - 1]) / w;
    }
    for j in (0..m - 1).rev() {
        let next = rhs[j + 1];
        rhs[j] = rhs[j] - cp[j] * next;
    }
    Ok(rhs)
}

/// Spline value at position `x` (node units); zero outside `[0, m-1]`.
pub fn eval<T: Real>(values: &[T], moments: &[T], x: T) -> T {
    let m = values.len();
    let last = T::of((m - 1) as f64);
    if x < T::zero() || x > last {
        return T::zero();
    }
    let mut j = x.floor().to_f64() as usize;
    if j >= m - 1 {
        j = m - 2;
    }
    let u = x - T::of(j as f64);
    let w = T::one() - u;
    let sixth = T::of(1.0 / 6.0);
    values[j] * w
        + values[j + 1] * u
        + sixth * (w * (w * w - T::one()) * moments[j] + u * (u * u - T::one()) * moments[j + 1])
}

/// Evaluate the spline through `values` at every node shifted upstream by
/// `shift` cells: `out[j] = S(j - shift)`. Errors if the boundary feet
/// leave the grid by more than one cell.
pub fn shift_line<T: Real>(
    values: &[T],
    shift: T,
    boundary: SplineBoundary,
    axis: usize,
    out: &mut [T],
) -> Result<()> {
    debug_assert_eq!(values.len(), out.len());
    let cells = shift.abs().to_f64();
    if cells > 1.0 + 1e-9 {
        return Err(CoreError::FootLeftGrid { axis, cells });
    }
    if shift == T::zero() {
        out.copy_from_slice(values);
        return Ok(());
    }
    let moments = fit_moments(values, boundary)?;
    for (j, o) in out.iter_mut().enumerate() {
        *o = eval(values, &moments, T::of(j as f64) - shift);
    }
    Ok(())
}
