//! Iterated integrals of the driving signal over coarse steps.
//!
//! Inside a coarse step the signal is replaced by the piecewise-linear
//! interpolant of its samples on the refined subgrid, and the iterated
//! integrals of that interpolant are computed exactly with Chen's identity.
//! This is exact for time paths and for scalar drivers, satisfies the
//! shuffle relations to rounding, and converges to the Young integral as the
//! subgrid is refined.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;

use super::signature::Signature;
use crate::error::{Error, Result};
use crate::multiindex::{shuffles, xi_set, MultiIndex};
use crate::signal::DrivingSignal;

/// Denominator guard in relative discrepancies.
pub const REL_EPS: f64 = 1e-300;

/// A coarse grid of `coarse_n` steps nested in the fine grid, each step
/// integrated over `refine_factor` sub-segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepGrid {
    pub coarse_n: usize,
    pub refine_factor: usize,
    stride: usize,
    sub: usize,
}

impl StepGrid {
    pub fn new(n_fine: usize, coarse_n: usize, refine_factor: usize) -> Result<Self> {
        if coarse_n == 0 || n_fine % coarse_n != 0 {
            return Err(Error::InvalidArgument(format!(
                "coarse_n = {coarse_n} must divide n_fine = {n_fine}"
            )));
        }
        let stride = n_fine / coarse_n;
        if refine_factor == 0 || stride % refine_factor != 0 {
            return Err(Error::InvalidArgument(format!(
                "refine_factor = {refine_factor} must divide the {stride} fine steps per coarse step"
            )));
        }
        Ok(StepGrid {
            coarse_n,
            refine_factor,
            stride,
            sub: stride / refine_factor,
        })
    }

    /// Use every fine point inside each coarse step.
    pub fn full(n_fine: usize, coarse_n: usize) -> Result<Self> {
        if coarse_n == 0 || n_fine % coarse_n != 0 {
            return Err(Error::InvalidArgument(format!(
                "coarse_n = {coarse_n} must divide n_fine = {n_fine}"
            )));
        }
        Self::new(n_fine, coarse_n, n_fine / coarse_n)
    }

    pub fn for_signal(signal: &DrivingSignal, coarse_n: usize, refine_factor: usize) -> Result<Self> {
        Self::new(signal.n_fine(), coarse_n, refine_factor)
    }

    /// Fine steps per coarse step.
    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Fine steps per sub-segment.
    pub fn sub(&self) -> usize {
        self.sub
    }

    /// Fine index of coarse point `k`.
    pub fn fine_index(&self, k: usize) -> usize {
        k * self.stride
    }

    fn check(&self, signal: &DrivingSignal) -> Result<()> {
        if self.coarse_n * self.stride != signal.n_fine() {
            return Err(Error::InvalidArgument(format!(
                "grid built for n_fine = {}, signal has {}",
                self.coarse_n * self.stride,
                signal.n_fine()
            )));
        }
        Ok(())
    }
}

fn check_word(signal: &DrivingSignal, alpha: &MultiIndex) -> Result<()> {
    alpha.check_alphabet(signal.m())
}

/// Running signature over fine indices `[a, b]` with sub-segments of `sub` fine steps.
fn signature_between(signal: &DrivingSignal, a: usize, b: usize, sub: usize, depth: usize) -> Signature {
    let m = signal.m();
    let mut sig = Signature::identity(m, depth);
    let mut delta = vec![0.0; m];
    let mut i = a;
    while i < b {
        for (j, d) in delta.iter_mut().enumerate() {
            *d = signal.increment(j + 1, i, i + sub);
        }
        sig.push_segment(&delta);
        i += sub;
    }
    sig
}

/// All iterated integrals up to `depth` over coarse step `k`.
pub fn step_signature(signal: &DrivingSignal, grid: &StepGrid, k: usize, depth: usize) -> Result<Signature> {
    grid.check(signal)?;
    if k >= grid.coarse_n {
        return Err(Error::InvalidArgument(format!("step {k} outside 0..{}", grid.coarse_n)));
    }
    let a = grid.fine_index(k);
    Ok(signature_between(signal, a, a + grid.stride, grid.sub, depth))
}

/// `x^α_{t_k, t_{k+1}}`.
pub fn step_integral(signal: &DrivingSignal, alpha: &MultiIndex, grid: &StepGrid, k: usize) -> Result<f64> {
    check_word(signal, alpha)?;
    if alpha.len() == 1 {
        grid.check(signal)?;
        let a = grid.fine_index(k);
        return Ok(signal.increment(alpha.at(1), a, a + grid.stride));
    }
    Ok(step_signature(signal, grid, k, alpha.len())?.get(alpha))
}

/// Signatures over `[t_k, t_k + i·h_sub]` for `i = 0..=refine_factor`, for
/// evaluating the scheme between coarse points.
pub fn running_signatures(signal: &DrivingSignal, grid: &StepGrid, k: usize, depth: usize) -> Result<Vec<Signature>> {
    grid.check(signal)?;
    let m = signal.m();
    let a = grid.fine_index(k);
    let mut out = Vec::with_capacity(grid.refine_factor + 1);
    let mut sig = Signature::identity(m, depth);
    out.push(sig.clone());
    let mut delta = vec![0.0; m];
    for s in 0..grid.refine_factor {
        let i = a + s * grid.sub;
        for (j, d) in delta.iter_mut().enumerate() {
            *d = signal.increment(j + 1, i, i + grid.sub);
        }
        sig.push_segment(&delta);
        out.push(sig.clone());
    }
    Ok(out)
}

/// Nested left-point Riemann sums on the refined subgrid: level `l`
/// accumulates the level `l − 1` value at the left endpoint times the
/// increment of letter `α(l)`. Kept as a diagnostic; the exact
/// piecewise-linear integrals above converge much faster.
pub fn left_point_integral(signal: &DrivingSignal, alpha: &MultiIndex, grid: &StepGrid, k: usize) -> Result<f64> {
    check_word(signal, alpha)?;
    grid.check(signal)?;
    let letters = alpha.letters();
    let mut level = vec![0.0; letters.len() + 1];
    level[0] = 1.0;
    let a = grid.fine_index(k);
    for s in 0..grid.refine_factor {
        let i = a + s * grid.sub;
        for l in (1..=letters.len()).rev() {
            level[l] += level[l - 1] * signal.increment(letters[l - 1], i, i + grid.sub);
        }
    }
    Ok(level[letters.len()])
}

/// `x^α` for a fixed list of words over every coarse step.
#[derive(Debug, Clone)]
pub struct StepIntegralTable {
    grid: StepGrid,
    words: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
    // values[k][w]
    values: Vec<Vec<f64>>,
}

impl StepIntegralTable {
    pub fn build(signal: &DrivingSignal, grid: &StepGrid, words: &[MultiIndex]) -> Result<Self> {
        grid.check(signal)?;
        for w in words {
            check_word(signal, w)?;
        }
        let depth = words.iter().map(MultiIndex::len).max().unwrap_or(0);
        let values = (0..grid.coarse_n)
            .into_par_iter()
            .map(|k| {
                let a = grid.fine_index(k);
                let sig = signature_between(signal, a, a + grid.stride, grid.sub, depth);
                words
                    .iter()
                    .map(|w| {
                        if w.len() == 1 {
                            signal.increment(w.at(1), a, a + grid.stride)
                        } else {
                            sig.get(w)
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self::from_values(*grid, words.to_vec(), values))
    }

    /// Assemble from precomputed per-step signatures.
    pub fn from_signatures(grid: &StepGrid, words: &[MultiIndex], sigs: &[Signature]) -> Result<Self> {
        if sigs.len() != grid.coarse_n {
            return Err(Error::InvalidArgument(format!(
                "{} signatures for {} steps",
                sigs.len(),
                grid.coarse_n
            )));
        }
        let values = sigs
            .iter()
            .map(|s| words.iter().map(|w| s.get(w)).collect())
            .collect();
        Ok(Self::from_values(*grid, words.to_vec(), values))
    }

    fn from_values(grid: StepGrid, words: Vec<MultiIndex>, values: Vec<Vec<f64>>) -> Self {
        let index = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        StepIntegralTable {
            grid,
            words,
            index,
            values,
        }
    }

    pub fn grid(&self) -> &StepGrid {
        &self.grid
    }

    pub fn coarse_n(&self) -> usize {
        self.grid.coarse_n
    }

    pub fn refine_factor(&self) -> usize {
        self.grid.refine_factor
    }

    pub fn words(&self) -> &[MultiIndex] {
        &self.words
    }

    pub fn get(&self, k: usize, alpha: &MultiIndex) -> Option<f64> {
        self.index.get(alpha).map(|&w| self.values[k][w])
    }

    /// Values of all words at step `k`, in the order of [`Self::words`].
    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    /// CSV with header `k,alpha,value`; words are written dotted.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "k,alpha,value")?;
        for (k, row) in self.values.iter().enumerate() {
            for (word, v) in self.words.iter().zip(row) {
                writeln!(w, "{k},{},{v:e}", word.dotted())?;
            }
        }
        Ok(())
    }
}

fn rel_discrepancy(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / (lhs.abs() + REL_EPS)
}

/// `|x^{γ′} x^{γ″} − Σ_{ρ∈Sh(γ′,γ″)} x^{(γ′,γ″)∘ρ⁻¹}| / |x^{γ′} x^{γ″}|` on step `k`.
pub fn shuffle_identity_check(
    signal: &DrivingSignal,
    gamma1: &MultiIndex,
    gamma2: &MultiIndex,
    grid: &StepGrid,
    k: usize,
) -> Result<f64> {
    let joined = gamma1.concat(gamma2);
    check_word(signal, &joined)?;
    let sig = step_signature(signal, grid, k, joined.len())?;
    let lhs = sig.get(gamma1) * sig.get(gamma2);
    let rhs: f64 = shuffles(gamma1, gamma2)?
        .iter()
        .map(|rho| sig.get(&rho.inverse().permute_word(&joined)))
        .sum();
    Ok(rel_discrepancy(lhs, rhs))
}

/// Nested integral of running iterated integrals against
/// `Σ_{ρ∈Ξ_r(τ⃗)} x^{γ∘ρ⁻¹}` with `τ_i = |γ¹| + … + |γ^i|`.
///
/// The left side is integrated independently: on each sub-segment every
/// running quantity is a polynomial in the local parameter and is
/// integrated exactly.
pub fn nested_integral_check(
    signal: &DrivingSignal,
    gammas: &[MultiIndex],
    grid: &StepGrid,
    k: usize,
) -> Result<f64> {
    if gammas.is_empty() {
        return Err(Error::InvalidArgument("need at least one word".into()));
    }
    let mut joined = gammas[0].clone();
    let mut taus = vec![gammas[0].len()];
    for g in &gammas[1..] {
        joined = joined.concat(g);
        taus.push(joined.len());
    }
    check_word(signal, &joined)?;
    grid.check(signal)?;
    let lhs = super::exact::nested_integral(signal, gammas, grid, k);
    let sig = step_signature(signal, grid, k, joined.len())?;
    let rhs: f64 = xi_set(&taus)?
        .iter()
        .map(|rho| sig.get(&rho.inverse().permute_word(&joined)))
        .sum();
    Ok(rel_discrepancy(lhs, rhs))
}

/// `Σ_k x^α_{t_k, t_{k+1}}` over the coarse steps between times `s` and `t`.
pub fn simplex_sum(signal: &DrivingSignal, alpha: &MultiIndex, grid: &StepGrid, s: f64, t: f64) -> Result<f64> {
    check_word(signal, alpha)?;
    grid.check(signal)?;
    let h = signal.horizon() / grid.coarse_n as f64;
    let idx = |x: f64| -> Result<usize> {
        let k = (x / h).round();
        if (k * h - x).abs() > 1e-9 * signal.horizon() || k < 0.0 || k as usize > grid.coarse_n {
            return Err(Error::InvalidArgument(format!("{x} is not a coarse grid point")));
        }
        Ok(k as usize)
    };
    let (ks, kt) = (idx(s)?, idx(t)?);
    if ks > kt {
        return Err(Error::InvalidArgument(format!("need s ≤ t, got {s} > {t}")));
    }
    let mut total = 0.0;
    for k in ks..kt {
        total += step_integral(signal, alpha, grid, k)?;
    }
    Ok(total)
}
