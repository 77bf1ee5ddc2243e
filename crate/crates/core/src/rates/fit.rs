//! Least-squares fits of `log error` against `log n`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Minimum number of ladder points for a slope.
pub const MIN_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of `log log n` in the joint fit, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_log: Option<f64>,
    /// Standard error of the slope (residual and Monte Carlo parts combined).
    pub slope_se: f64,
    /// 95% half-width.
    pub ci: f64,
}

/// Sum with a fixed pairwise tree, so results do not depend on how the
/// terms were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Sample mean and its standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    if xs.len() < 2 {
        return (m, f64::NAN);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - m).powi(2)).collect();
    (m, (pairwise_sum(&dev) / (n - 1.0) / n).sqrt())
}

/// Linear quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn t_quantile(dof: usize) -> f64 {
    if dof == 0 {
        return f64::INFINITY;
    }
    StudentsT::new(0.0, 1.0, dof as f64)
        .map(|t| t.inverse_cdf(0.975))
        .unwrap_or(f64::INFINITY)
}

/// Fit `log e = a + q log n` (and `+ c log log n` with `with_log_log`).
///
/// `log_se` holds standard errors of `log e` from Monte Carlo sampling;
/// they are propagated through the linear estimator and combined with the
/// residual scatter.
pub fn fit_power_law(ns: &[f64], errors: &[f64], log_se: Option<&[f64]>, with_log_log: bool) -> Result<PowerFit> {
    let k = ns.len();
    let p = if with_log_log { 3 } else { 2 };
    if k != errors.len() || log_se.is_some_and(|s| s.len() != k) {
        return Err(Error::InvalidArgument("ladder and error lengths differ".into()));
    }
    if k < MIN_POINTS.max(p + 1) {
        return Err(Error::InsufficientLadder {
            usable: k,
            required: MIN_POINTS.max(p + 1),
        });
    }
    if errors.iter().any(|e| !(*e > 0.0 && e.is_finite())) || ns.iter().any(|n| *n <= 1.0) {
        return Err(Error::InvalidArgument("errors must be positive and finite, n > 1".into()));
    }
    let x = DMatrix::from_fn(k, p, |i, j| match j {
        0 => 1.0,
        1 => ns[i].ln(),
        _ => ns[i].ln().ln(),
    });
    let y = DVector::from_iterator(k, errors.iter().map(|e| e.ln()));
    let xtx_inv = (x.transpose() * &x)
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("degenerate ladder".into()))?;
    // rows of the estimator (XᵀX)⁻¹Xᵀ
    let est = &xtx_inv * x.transpose();
    let beta = &est * &y;
    let resid = &y - &x * &beta;
    let dof = k - p;
    let s2 = resid.norm_squared() / dof as f64;
    let mut var = s2 * xtx_inv[(1, 1)];
    if let Some(se) = log_se {
        var += (0..k).map(|i| (est[(1, i)] * se[i]).powi(2)).sum::<f64>();
    }
    let slope_se = var.sqrt();
    Ok(PowerFit {
        slope: beta[1],
        intercept: beta[0],
        log_log: with_log_log.then(|| beta[2]),
        slope_se,
        ci: t_quantile(dof) * slope_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_synthetic_power_law() {
        let ns: Vec<f64> = (6..=11).map(|e| 2f64.powi(e)).collect();
        for q in [0.4, 0.9, 1.8] {
            let errs: Vec<f64> = ns.iter().map(|n| 3.7 * n.powf(-q)).collect();
            let f = fit_power_law(&ns, &errs, None, false).unwrap();
            assert!((f.slope + q).abs() <= 1e-10);
            assert!((f.intercept - 3.7f64.ln()).abs() <= 1e-9);
            assert!(f.ci < 1e-8);
            let j: Vec<f64> = ns.iter().map(|n| 0.5 * n.powf(-q) * n.ln().sqrt()).collect();
            let f = fit_power_law(&ns, &j, None, true).unwrap();
            assert!((f.slope + q).abs() <= 1e-9);
            assert!((f.log_log.unwrap() - 0.5).abs() <= 1e-9);
        }
    }

    #[test]
    fn rejects_short_ladders() {
        let e = fit_power_law(&[2.0, 4.0, 8.0], &[1.0, 0.5, 0.25], None, false);
        assert!(matches!(e, Err(Error::InsufficientLadder { usable: 3, .. })));
    }

    #[test]
    fn monte_carlo_noise_widens_ci() {
        let ns = [64.0, 128.0, 256.0, 512.0];
        let errs = [1.0, 0.5, 0.25, 0.125];
        let a = fit_power_law(&ns, &errs, None, false).unwrap();
        let b = fit_power_law(&ns, &errs, Some(&[0.1; 4]), false).unwrap();
        assert!(b.ci > a.ci);
    }

    #[test]
    fn pairwise_is_order_fixed() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin() * 1e-3).collect();
        assert_eq!(pairwise_sum(&xs).to_bits(), pairwise_sum(&xs.clone()).to_bits());
        assert!((pairwise_sum(&xs) - xs.iter().sum::<f64>()).abs() < 1e-12);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
    }
}
