//! Least-squares power-law fitting for convergence studies.
//!
//! A sweep produces pairs `(eps, value)` expected to follow `value ~ C
//! eps^p`; the fit runs on `(ln eps, ln value)`, so `slope` is the rate `p`
//! and `intercept` is `ln C`. The half-width is twice the standard error
//! of the slope, a rough 95% band under the usual regression assumptions.

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub halfwidth: f64,
    /// Root-mean-square residual of the log-log fit.
    pub rms_residual: f64,
}

impl RateFit {
    /// Fitted value at a given eps, for drawing the fit line.
    pub fn eval(&self, eps: f64) -> f64 {
        (self.intercept + self.slope * eps.ln()).exp()
    }
}

/// Fit `ln value = intercept + slope ln eps`. Requires at least three
/// pairs and strictly positive coordinates.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 3 {
        return Err(HarnessError::Fit(format!(
            "need at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    for &(e, v) in pairs {
        if !(e > 0.0) || !(v > 0.0) {
            return Err(HarnessError::Fit(format!(
                "non-positive pair ({e}, {v}) cannot be log-fitted"
            )));
        }
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::Fit("all eps values coincide".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let stderr = (ssr / (n - 2.0) / sxx).max(0.0).sqrt();
    Ok(RateFit {
        slope,
        intercept,
        halfwidth: 2.0 * stderr,
        rms_residual: (ssr / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_square_root_law_is_recovered() {
        let pairs: Vec<(f64, f64)> =
            [0.1, 0.05, 0.025, 0.0125].iter().map(|&e: &f64| (e, e.sqrt())).collect();
        let fit = fit_rate(&pairs).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12, "slope {}", fit.slope);
        assert!(fit.halfwidth < 1e-12);
    }

    #[test]
    fn quadratic_with_prefactor_hits_slope_and_intercept() {
        let pairs: Vec<(f64, f64)> =
            [0.2, 0.1, 0.05, 0.025].iter().map(|&e| (e, 3.0 * e * e)).collect();
        let fit = fit_rate(&pairs).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn preconditions_are_enforced() {
        assert!(fit_rate(&[(0.1, 1.0), (0.05, 0.5)]).is_err());
        assert!(fit_rate(&[(0.1, 1.0), (0.05, -0.5), (0.025, 0.2)]).is_err());
        assert!(fit_rate(&[(0.1, 1.0), (0.1, 0.5), (0.1, 0.2)]).is_err());
    }

    #[test]
    fn noisy_data_reports_a_positive_band() {
        let pairs = [(0.1, 0.32), (0.05, 0.24), (0.025, 0.155), (0.0125, 0.118)];
        let fit = fit_rate(&pairs).unwrap();
        assert!(fit.halfwidth > 0.0);
        assert!(fit.rms_residual > 0.0);
        assert!(fit.slope > 0.0);
    }
}
