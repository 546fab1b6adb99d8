//! Uniform periodic grids on the torus (1 to 3 spatial axes).
//!
//! Nodes on axis `i` sit at `x_j = j * L_i / n_i` (left endpoints, no
//! duplicated seam). Wavenumbers follow FFT ordering: index `j` carries the
//! integer mode `m = j` for `j < n/2` and `m = j - n` otherwise, with
//! physical wavenumber `k = 2*pi*m / L`.

use crate::error::{CoreError, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Axis<T> {
    pub n: usize,
    pub length: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorusGrid<T> {
    axes: Vec<Axis<T>>,
}

impl<T: Real> TorusGrid<T> {
    pub fn new(axes: &[(usize, T)]) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(CoreError::InvalidGrid(format!(
                "expected 1..=3 axes, got {}",
                axes.len()
            )));
        }
        for (i, &(n, length)) in axes.iter().enumerate() {
            if n < 8 || n % 2 != 0 {
                return Err(CoreError::InvalidGrid(format!(
                    "axis {i}: n = {n} must be even and at least 8"
                )));
            }
            if !(length > T::zero()) || !length.is_finite() {
                return Err(CoreError::InvalidGrid(format!(
                    "axis {i}: length must be positive and finite"
                )));
            }
        }
        Ok(Self {
            axes: axes.iter().map(|&(n, length)| Axis { n, length }).collect(),
        })
    }

    /// One-axis torus of circumference 2*pi.
    pub fn line_2pi(n: usize) -> Result<Self> {
        Self::new(&[(n, T::of(2.0) * T::PI())])
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, i: usize) -> &Axis<T> {
        &self.axes[i]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    pub fn len(&self, axis: usize) -> usize {
        self.axes[axis].n
    }

    pub fn length(&self, axis: usize) -> T {
        self.axes[axis].length
    }

    pub fn spacing(&self, axis: usize) -> T {
        self.axes[axis].length / T::of(self.axes[axis].n as f64)
    }

    pub fn total_points(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    /// Volume element dx_0 * dx_1 * ...
    pub fn cell_volume(&self) -> T {
        (0..self.ndim()).map(|i| self.spacing(i)).fold(T::one(), |a, b| a * b)
    }

    pub fn volume(&self) -> T {
        self.axes.iter().map(|a| a.length).fold(T::one(), |a, b| a * b)
    }

    pub fn nodes(&self, axis: usize) -> Vec<T> {
        let h = self.spacing(axis);
        (0..self.len(axis)).map(|j| T::of(j as f64) * h).collect()
    }

    /// Physical wavenumbers in FFT order; the Nyquist slot `j = n/2` carries
    /// `m = -n/2`.
    pub fn wavenumbers(&self, axis: usize) -> Vec<T> {
        let n = self.len(axis);
        let base = T::of(2.0) * T::PI() / self.length(axis);
        (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as isize } else { j as isize - n as isize };
                base * T::of(m as f64)
            })
            .collect()
    }

    /// Largest integer mode retained by the 2/3 dealiasing rule on `axis`:
    /// modes with |m| > floor(n/3) are discarded by `product_dealiased`.
    /// Largest retained mode index under the 2/3 rule, chosen strictly below
    /// n/3 so that quadratic products of retained modes alias only onto
    /// discarded slots.
    pub fn dealias_mode_cap(&self, axis: usize) -> usize {
        (self.len(axis) - 1) / 3
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(CoreError::GridMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )))
        }
    }
}
