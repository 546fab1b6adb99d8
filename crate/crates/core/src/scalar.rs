//! Scalar abstraction for the numerical kernels.
//!
//! Everything in this crate is generic over [`Real`], which bundles the
//! floating-point traits the solvers need (transcendentals, FFT support,
//! conversions). `f32` and `f64` implement it; the crate-root aliases pin
//! the default precision to `f64`, which is what the shipped tolerances
//! assume.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps};
use rustfft::FftNum;
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssignOps
    + FftNum
    + Sum<Self>
    + Display
    + LowerExp
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from an `f64` literal; panics only if the
    /// target type cannot represent any nearby value (never for f32/f64).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal not representable in this scalar type")
    }

    fn to_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar convertible to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Pairwise (cascade) summation: deterministic and O(log n) error growth,
/// used for every physically meaningful integral so that reductions do not
/// depend on thread count.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    pairwise_map_sum(xs, |x| x)
}

/// Pairwise summation of `f(x)` over a slice without materializing the map.
pub fn pairwise_map_sum<T: Real>(xs: &[T], f: impl Fn(T) -> T + Copy) -> T {
    if xs.len() <= 32 {
        let mut acc = T::zero();
        for &x in xs {
            acc = acc + f(x);
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_map_sum(&xs[..mid], f) + pairwise_map_sum(&xs[mid..], f)
    }
}

/// Pairwise summation of `f(a_i, b_i)` over two equal-length slices.
pub fn pairwise_zip_sum<T: Real>(a: &[T], b: &[T], f: impl Fn(T, T) -> T + Copy) -> T {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= 32 {
        let mut acc = T::zero();
        for (&x, &y) in a.iter().zip(b.iter()) {
            acc = acc + f(x, y);
        }
        acc
    } else {
        let mid = a.len() / 2;
        pairwise_zip_sum(&a[..mid], &b[..mid], f) + pairwise_zip_sum(&a[mid..], &b[mid..], f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-12);
    }

    #[test]
    fn pairwise_is_accurate_on_cancelling_input() {
        // 1 followed by many tiny values that naive summation absorbs badly.
        let n = 1 << 20;
        let mut xs = vec![1e-16f64; n];
        xs[0] = 1.0;
        let exact = 1.0 + (n as f64 - 1.0) * 1e-16;
        assert!((pairwise_sum(&xs) - exact).abs() < 1e-12);
    }

    #[test]
    fn literal_conversion_roundtrips() {
        let x: f32 = Real::of(0.5);
        assert_eq!(x, 0.5f32);
        let y: f64 = Real::of(1.0e-12);
        assert_eq!(y, 1.0e-12);
    }
}
