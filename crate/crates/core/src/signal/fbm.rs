//! Exact-in-law fractional Gaussian noise.
//!
//! The default sampler embeds the increment covariance in a circulant matrix
//! of size `2n` (Davies and Harte, Wood and Chan). When the embedding is not
//! nonnegative definite the dense Cholesky factor is used instead.

use std::sync::Arc;

use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Largest size for which the dense Cholesky fallback is attempted.
pub const CHOLESKY_MAX: usize = 2048;

/// Negative circulant eigenvalues above `-EIGEN_TOL · λ_max` are clipped to zero.
pub const EIGEN_TOL: f64 = 1e-10;

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub fn fgn_autocov(h: f64, k: usize) -> f64 {
    let k = k as f64;
    let two_h = 2.0 * h;
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
}

/// `E[B_t B_s] = ½(t^{2H} + s^{2H} − |t − s|^{2H})`.
pub fn fbm_cov(h: f64, t: f64, s: f64) -> f64 {
    0.5 * (t.powf(2.0 * h) + s.powf(2.0 * h) - (t - s).abs().powf(2.0 * h))
}

fn check(h: f64, n: usize, horizon: f64) -> Result<()> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Signal(format!("Hurst parameter {h} outside (0, 1)")));
    }
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Signal(format!("n_fine = {n} is not a power of two")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Signal(format!("horizon {horizon} must be positive")));
    }
    Ok(())
}

enum Method {
    Circulant {
        // sqrt(λ_k / M) for k = 0..=n
        weights: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Cholesky(DMatrix<f64>),
}

/// Reusable sampler of fBm paths on `n + 1` equispaced points of `[0, T]`.
pub struct FbmSampler {
    h: f64,
    n: usize,
    scale: f64,
    method: Method,
}

impl FbmSampler {
    pub fn new(h: f64, n: usize, horizon: f64) -> Result<Self> {
        check(h, n, horizon)?;
        let scale = (horizon / n as f64).powf(h);
        let m = 2 * n;
        let mut row: Vec<Complex<f64>> = (0..m)
            .map(|k| Complex::new(fgn_autocov(h, k.min(m - k)), 0.0))
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut row);
        let lam_max = row.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
        let worst = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        let method = if worst < -EIGEN_TOL * lam_max {
            warn!("circulant embedding not nonnegative (min eigenvalue {worst:e}) for H={h}, n={n}; using Cholesky");
            Method::Cholesky(Self::cholesky(h, n)?)
        } else {
            let weights = row[..=n]
                .iter()
                .map(|c| (c.re.max(0.0) / m as f64).sqrt())
                .collect();
            Method::Circulant { weights, fft }
        };
        Ok(FbmSampler { h, n, scale, method })
    }

    /// Force the dense Cholesky method.
    pub fn cholesky_only(h: f64, n: usize, horizon: f64) -> Result<Self> {
        check(h, n, horizon)?;
        Ok(FbmSampler {
            h,
            n,
            scale: (horizon / n as f64).powf(h),
            method: Method::Cholesky(Self::cholesky(h, n)?),
        })
    }

    fn cholesky(h: f64, n: usize) -> Result<DMatrix<f64>> {
        if n > CHOLESKY_MAX {
            return Err(Error::Signal(format!(
                "n_fine = {n} exceeds the Cholesky limit {CHOLESKY_MAX}"
            )));
        }
        let cov = DMatrix::from_fn(n, n, |i, j| fgn_autocov(h, i.abs_diff(j)));
        cov.cholesky()
            .map(|c| c.l())
            .ok_or_else(|| Error::Signal(format!("fGn covariance not positive definite (H={h}, n={n})")))
    }

    pub fn hurst(&self) -> f64 {
        self.h
    }

    pub fn is_circulant(&self) -> bool {
        matches!(self.method, Method::Circulant { .. })
    }

    /// Unit-variance noise scaled to steps of length `T/n`.
    pub fn sample_increments<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.n;
        let mut out = match &self.method {
            Method::Circulant { weights, fft } => {
                let m = 2 * n;
                let mut z = vec![Complex::new(0.0, 0.0); m];
                z[0] = Complex::new(weights[0] * rng.sample::<f64, _>(StandardNormal), 0.0);
                z[n] = Complex::new(weights[n] * rng.sample::<f64, _>(StandardNormal), 0.0);
                for k in 1..n {
                    let w = weights[k] * std::f64::consts::FRAC_1_SQRT_2;
                    let a: f64 = rng.sample(StandardNormal);
                    let b: f64 = rng.sample(StandardNormal);
                    z[k] = Complex::new(w * a, w * b);
                    z[m - k] = z[k].conj();
                }
                fft.process(&mut z);
                z[..n].iter().map(|c| c.re).collect::<Vec<_>>()
            }
            Method::Cholesky(l) => {
                let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                (l * g).iter().copied().collect()
            }
        };
        out.iter_mut().for_each(|x| *x *= self.scale);
        out
    }

    /// Path values `B_{kT/n}`, `k = 0..=n`, starting at zero.
    pub fn sample_path<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let inc = self.sample_increments(rng);
        let mut path = Vec::with_capacity(self.n + 1);
        path.push(0.0);
        let mut acc = 0.0;
        for d in inc {
            acc += d;
            path.push(acc);
        }
        path
    }
}
