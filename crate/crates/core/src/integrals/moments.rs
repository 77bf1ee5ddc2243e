//! Deterministic moments `D_γ(t) = E[B^γ_{0,t}]` of iterated fBm integrals.

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;

use super::step::{step_integral, StepGrid};
use crate::error::{Error, Result};
use crate::multiindex::{ExponentMode, ExponentVector, MultiIndex};
use crate::signal::{SignalGenerator, SignalSpec};

/// Longest word the quadrature handles.
pub const MAX_QUADRATURE_LEN: usize = 6;

const SMOOTHING_POWER: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

fn default_mc_paths() -> usize {
    20_000
}
fn default_mc_n_fine() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSpec {
    pub gamma: MultiIndex,
    pub hurst: ExponentVector,
    pub method: MomentMethod,
    /// Gauss–Legendre nodes per dimension; chosen from `|γ|` when absent.
    #[serde(default)]
    pub nodes: Option<usize>,
    #[serde(default = "default_mc_paths")]
    pub mc_paths: usize,
    #[serde(default = "default_mc_n_fine")]
    pub mc_n_fine: usize,
    #[serde(default)]
    pub seed: u64,
}

impl MomentSpec {
    pub fn new(gamma: MultiIndex, hurst: ExponentVector, method: MomentMethod) -> Self {
        MomentSpec {
            gamma,
            hurst,
            method,
            nodes: None,
            mc_paths: default_mc_paths(),
            mc_n_fine: default_mc_n_fine(),
            seed: 0,
        }
    }

    /// Nodes per dimension actually used by the quadrature.
    pub fn quadrature_nodes(&self) -> usize {
        self.nodes.unwrap_or(match self.gamma.len() {
            0..=3 => 64,
            4 => 40,
            5 => 24,
            _ => 16,
        })
    }
}

/// A moment value with its Monte Carlo standard error (zero when exact).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// True when some fBm letter occurs an odd number of times, which forces
/// `D_γ ≡ 0`.
pub fn parity_vanishes(gamma: &MultiIndex, hurst: &ExponentVector) -> bool {
    gamma
        .counts(hurst.m())
        .iter()
        .enumerate()
        .any(|(j, &c)| !hurst.is_time(j + 1) && c % 2 == 1)
}

fn check_spec(spec: &MomentSpec, t: f64) -> Result<()> {
    if spec.hurst.mode != ExponentMode::Hurst {
        return Err(Error::Config("moment exponents must be Hurst parameters".into()));
    }
    spec.gamma.check_alphabet(spec.hurst.m())?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time {t} must be nonnegative")));
    }
    Ok(())
}

pub fn d_gamma(spec: &MomentSpec, t: f64) -> Result<f64> {
    d_gamma_estimate(spec, t).map(|e| e.value)
}

pub fn d_gamma_estimate(spec: &MomentSpec, t: f64) -> Result<MomentEstimate> {
    check_spec(spec, t)?;
    let exact = |value| MomentEstimate { value, std_error: 0.0 };
    if parity_vanishes(&spec.gamma, &spec.hurst) {
        return Ok(exact(0.0));
    }
    match spec.method {
        MomentMethod::ClosedForm => closed_form(&spec.gamma, &spec.hurst, t).map(exact),
        MomentMethod::Quadrature => quadrature(&spec.gamma, &spec.hurst, spec.quadrature_nodes(), t).map(exact),
        MomentMethod::MonteCarlo => monte_carlo(spec, t),
    }
}

fn double_factorial(n: usize) -> f64 {
    (1..=n).rev().step_by(2).map(|k| k as f64).product()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `D_γ(t)` by the parity rule, then the closed form when one exists,
/// then quadrature with the default node count.
pub fn d_gamma_default(gamma: &MultiIndex, hurst: &ExponentVector, t: f64) -> Result<f64> {
    let spec = MomentSpec::new(gamma.clone(), hurst.clone(), MomentMethod::ClosedForm);
    match d_gamma(&spec, t) {
        Err(Error::Config(_)) => d_gamma(
            &MomentSpec {
                method: MomentMethod::Quadrature,
                ..spec
            },
            t,
        ),
        other => other,
    }
}

/// Closed forms: pure time words, `|γ| = 2`, one repeated fBm letter, and
/// time letters with a single fBm pair.
pub fn closed_form(gamma: &MultiIndex, hurst: &ExponentVector, t: f64) -> Result<f64> {
    if parity_vanishes(gamma, hurst) {
        return Ok(0.0);
    }
    let r = gamma.len();
    let h_gamma = hurst.weight(gamma);
    let noise: Vec<usize> = (1..=r).filter(|&i| !hurst.is_time(gamma.at(i))).collect();
    if noise.is_empty() {
        return Ok(t.powi(r as i32) / factorial(r));
    }
    if r == 2 {
        // (j, j) with j an fBm letter
        return Ok(0.5 * t.powf(h_gamma));
    }
    let first = gamma.at(noise[0]);
    if noise.len() == r && noise.iter().all(|&i| gamma.at(i) == first) {
        return Ok(double_factorial(r - 1) / factorial(r) * t.powf(h_gamma));
    }
    if noise.len() == 2 {
        let h = hurst.value(first);
        let k = (noise[1] - noise[0]) as f64;
        let rr = r as f64;
        let d1 = h * (2.0 * h - 1.0) * gamma_fn(k + 2.0 * h - 2.0) / (gamma_fn(k) * gamma_fn(rr + 2.0 * h - 1.0));
        return Ok(d1 * t.powf(h_gamma));
    }
    Err(Error::Config(format!(
        "no closed form for D_{gamma}; use the quadrature method"
    )))
}

/// All perfect matchings of `positions` (1-based) pairing equal letters.
fn pairings(gamma: &MultiIndex, positions: &[usize]) -> Vec<Vec<(usize, usize)>> {
    fn go(gamma: &MultiIndex, rest: &[usize], cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        let Some((&a, tail)) = rest.split_first() else {
            out.push(cur.clone());
            return;
        };
        for (idx, &b) in tail.iter().enumerate() {
            if gamma.at(a) != gamma.at(b) {
                continue;
            }
            let remaining: Vec<usize> = tail.iter().enumerate().filter(|&(i, _)| i != idx).map(|(_, &p)| p).collect();
            cur.push((a, b));
            go(gamma, &remaining, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(gamma, positions, &mut Vec::new(), &mut out);
    out
}

/// Sum over pairings of `∫_{0<t_1<⋯<t_r<t} Π_pairs α_H |t_b − t_a|^{2H−2} dt`.
///
/// Homogeneity gives `D_γ(t) = t^{H_γ} D_γ(1)` and fixes `t_r = 1` at the
/// cost of a factor `1/H_γ`. The remaining simplex is parametrized from the
/// top down by `t_a = t_{a+1}(1 − s_a^q)` with `q = 1/(2H_min − 1)`, whose
/// Jacobian cancels the pair singularities, then integrated by tensor
/// Gauss–Legendre.
pub fn quadrature(gamma: &MultiIndex, hurst: &ExponentVector, nodes: usize, t: f64) -> Result<f64> {
    let r = gamma.len();
    if r > MAX_QUADRATURE_LEN {
        return Err(Error::QuadratureOrder(r));
    }
    if parity_vanishes(gamma, hurst) {
        return Ok(0.0);
    }
    let noise: Vec<usize> = (1..=r).filter(|&i| !hurst.is_time(gamma.at(i))).collect();
    let matchings = pairings(gamma, &noise);
    let h_min = noise.iter().map(|&i| hurst.value(gamma.at(i))).fold(1.0, f64::min);
    let q = if noise.is_empty() { 1.0 } else { 1.0 / (2.0 * h_min - 1.0) };

    // pair data: (a, b, 2H − 2, α_H), 0-based positions
    let pair_data: Vec<Vec<(usize, usize, f64, f64)>> = matchings
        .iter()
        .map(|m| {
            m.iter()
                .map(|&(a, b)| {
                    let h = hurst.value(gamma.at(a));
                    (a - 1, b - 1, 2.0 * h - 2.0, h * (2.0 * h - 1.0))
                })
                .collect()
        })
        .collect();

    let (x, w) = GaussLegendre::nodes_and_weights(nodes);
    // Gauss nodes u on [0, 1], smoothed at both ends by
    // s = u^p / (u^p + (1 − u)^p), since the outer factors t_{a+1}^{2H−1}
    // leave power singularities at s = 1; then s ↦ s^q with Jacobian q s^{q−1}.
    let p = SMOOTHING_POWER;
    let s_nodes: Vec<(f64, f64)> = x
        .iter()
        .zip(&w)
        .map(|(&xi, &wi)| {
            let u = 0.5 * (xi + 1.0);
            let (a, b) = (u.powf(p), (1.0 - u).powf(p));
            let s = a / (a + b);
            let ds = p * (u * (1.0 - u)).powf(p - 1.0) / (a + b).powi(2);
            (s.powf(q), 0.5 * wi * ds * q * s.powf(q - 1.0))
        })
        .collect();

    // gaps[a] = t_{a+1} − t_a, kept separately so that tiny gaps near
    // t = 1 do not cancel
    let integrand = |gaps: &[f64]| -> f64 {
        pair_data
            .iter()
            .map(|pairs| {
                pairs
                    .iter()
                    .map(|&(a, b, e, c)| c * gaps[a..b].iter().sum::<f64>().powf(e))
                    .product::<f64>()
            })
            .sum()
    };

    let integral = if r == 1 {
        integrand(&[])
    } else {
        // outermost free variable parallelized
        s_nodes
            .par_iter()
            .map(|&(sq, jw)| {
                let mut ts = vec![0.0; r];
                let mut gaps = vec![0.0; r - 1];
                ts[r - 1] = 1.0;
                ts[r - 2] = 1.0 - sq;
                gaps[r - 2] = sq;
                jw * nest(&mut ts, &mut gaps, r - 2, &s_nodes, &integrand)
            })
            .sum()
    };
    let h_gamma = hurst.weight(gamma);
    Ok(integral / h_gamma * t.powf(h_gamma))
}

// integrate over t_0..t_{a-1} given t_a..t_{r-1}
fn nest(ts: &mut [f64], gaps: &mut [f64], a: usize, nodes: &[(f64, f64)], f: &dyn Fn(&[f64]) -> f64) -> f64 {
    if a == 0 {
        return f(gaps);
    }
    let upper = ts[a];
    let mut acc = 0.0;
    for &(sq, jw) in nodes {
        ts[a - 1] = upper * (1.0 - sq);
        gaps[a - 1] = upper * sq;
        acc += jw * upper * nest(ts, gaps, a - 1, nodes, f);
    }
    acc
}

/// Average of `x^γ_{0,t}` over sampled signals.
fn monte_carlo(spec: &MomentSpec, t: f64) -> Result<MomentEstimate> {
    if spec.mc_paths < 2 {
        return Err(Error::Config("Monte Carlo moments need at least 2 paths".into()));
    }
    if t == 0.0 {
        return Ok(MomentEstimate { value: 0.0, std_error: 0.0 });
    }
    let sig_spec = SignalSpec::new(
        spec.hurst.clone(),
        t,
        spec.mc_n_fine,
        spec.seed,
        spec.hurst.has_time_letter(),
    )?;
    let gen = SignalGenerator::new(&sig_spec)?;
    let grid = StepGrid::full(spec.mc_n_fine, 1)?;
    let samples: Vec<f64> = (0..spec.mc_paths as u64)
        .into_par_iter()
        .map(|p| step_integral(&gen.generate(p), &spec.gamma, &grid, 0))
        .collect::<Result<_>>()?;
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(MomentEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
    })
}
