//! Shared FFT plan registry.
//!
//! Plans are cached per (scalar type, length, direction) behind a mutex so
//! that worker threads reuse twiddle tables instead of re-planning inside the
//! advection loops. rustfft transforms are unnormalized; [`inverse_scaled`]
//! applies the 1/n factor.

use crate::scalar::Real;
use num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

struct Holder<T: Real>(Arc<dyn Fft<T>>);

type Registry = Mutex<HashMap<(TypeId, usize, bool), Arc<dyn Any + Send + Sync>>>;

static REGISTRY: OnceLock<Registry> = OnceLock::new();

pub fn plan<T: Real>(n: usize, direction: FftDirection) -> Arc<dyn Fft<T>> {
    let inverse = matches!(direction, FftDirection::Inverse);
    let key = (TypeId::of::<T>(), n, inverse);
    let registry = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = registry.lock().expect("fft registry poisoned");
    if let Some(entry) = map.get(&key) {
        let holder = entry.downcast_ref::<Holder<T>>().expect("registry type confusion");
        return holder.0.clone();
    }
    let mut planner = FftPlanner::<T>::new();
    let fft = planner.plan_fft(n, direction);
    map.insert(key, Arc::new(Holder(fft.clone())));
    fft
}

/// In-place forward transform of one line.
pub fn forward<T: Real>(line: &mut [Complex<T>]) {
    plan::<T>(line.len(), FftDirection::Forward).process(line);
}

/// In-place inverse transform of one line, scaled by 1/n.
pub fn inverse_scaled<T: Real>(line: &mut [Complex<T>]) {
    let n = line.len();
    plan::<T>(n, FftDirection::Inverse).process(line);
    let scale = T::one() / T::of(n as f64);
    for c in line.iter_mut() {
        *c = *c * scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_inverse_roundtrip() {
        let n = 32;
        let orig: Vec<Complex<f64>> =
            (0..n).map(|j| Complex::new((j as f64).cos(), (j as f64 * 0.3).sin())).collect();
        let mut line = orig.clone();
        forward(&mut line);
        inverse_scaled(&mut line);
        for (a, b) in line.iter().zip(orig.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn plans_are_cached_and_shared() {
        let a = plan::<f64>(64, FftDirection::Forward);
        let b = plan::<f64>(64, FftDirection::Forward);
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn registry_separates_scalar_types() {
        let a = plan::<f32>(16, FftDirection::Forward);
        let b = plan::<f64>(16, FftDirection::Forward);
        assert_eq!(a.len(), b.len());
    }
}
