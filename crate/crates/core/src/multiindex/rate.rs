//! Theoretical convergence-rate exponents of incomplete Taylor schemes and
//! the optimal index sets attaining a given rate.
//!
//! Both minimizations run over the infinite complement Γ \ Γ̃. Word values
//! grow at least linearly in the word length, so a depth-first search that
//! prunes every prefix whose lower bound already exceeds the best value found
//! visits finitely many words.

use log::warn;

use super::exponents::{ExponentMode, ExponentVector};
use super::set::IndexSet;
use super::word::{MultiIndex, ENUMERATION_BUDGET};
use crate::error::{Error, Result};

/// Two rates closer than this are the same rate. Words with equal letter
/// counts but different letter orders may otherwise differ by one ulp.
pub const RATE_TOL: f64 = 1e-12;

/// Hard cap on word length explored by the searches.
pub const MAX_SEARCH_LEN: usize = 64;

/// Default horizon for [`next_rate_and_correction_set`].
pub const NEXT_RATE_HORIZON: usize = 16;

/// `Σ_i β_{α(i)} − 1`.
pub fn theta_value(alpha: &MultiIndex, beta: &ExponentVector) -> f64 {
    beta.weight(alpha) - 1.0
}

/// `r′(α)`: number of letters that are not the time letter.
pub fn noise_count(alpha: &MultiIndex, h: &ExponentVector) -> usize {
    alpha.letters().iter().filter(|&&l| !h.is_time(l)).count()
}

/// ϑ(α): 1 when `r′(α)` is even, the largest noise exponent in α otherwise.
pub fn vartheta(alpha: &MultiIndex, h: &ExponentVector) -> f64 {
    vartheta_counts(&alpha.counts(h.m()), h)
}

fn vartheta_counts(counts: &[usize], h: &ExponentVector) -> f64 {
    let noise: usize = counts
        .iter()
        .enumerate()
        .filter(|(j, _)| !h.is_time(j + 1))
        .map(|(_, c)| c)
        .sum();
    if noise % 2 == 0 {
        1.0
    } else {
        counts
            .iter()
            .enumerate()
            .filter(|&(j, &c)| c > 0 && !h.is_time(j + 1))
            .map(|(j, _)| h.value(j + 1))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `H_α − ϑ(α)`.
pub fn rho_value(alpha: &MultiIndex, h: &ExponentVector) -> f64 {
    let c = alpha.counts(h.m());
    h.weight_of_counts(&c) - vartheta_counts(&c, h)
}

fn require_mode(e: &ExponentVector, mode: ExponentMode) -> Result<()> {
    if e.mode != mode {
        return Err(Error::InvalidArgument(format!(
            "expected {mode:?} exponents, got {:?}",
            e.mode
        )));
    }
    Ok(())
}

enum Visit {
    Descend,
    Prune,
}

/// Depth-first walk over all words, letters in lexicographic order.
struct Walker {
    m: usize,
    max_len: usize,
    nodes: u64,
    truncated: bool,
}

impl Walker {
    fn new(m: usize, max_len: usize) -> Self {
        Walker {
            m,
            max_len,
            nodes: 0,
            truncated: false,
        }
    }

    fn run(&mut self, visit: &mut dyn FnMut(&[usize], &[usize]) -> Visit) -> Result<()> {
        let mut word = Vec::new();
        let mut counts = vec![0usize; self.m];
        self.step(&mut word, &mut counts, visit)
    }

    fn step(
        &mut self,
        word: &mut Vec<usize>,
        counts: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize], &[usize]) -> Visit,
    ) -> Result<()> {
        for l in 1..=self.m {
            self.nodes += 1;
            if self.nodes > ENUMERATION_BUDGET {
                return Err(Error::EnumerationTooLarge {
                    requested: self.nodes as f64,
                    budget: ENUMERATION_BUDGET,
                });
            }
            word.push(l);
            counts[l - 1] += 1;
            if let Visit::Descend = visit(word, counts) {
                if word.len() < self.max_len {
                    self.step(word, counts, visit)?;
                } else {
                    self.truncated = true;
                }
            }
            counts[l - 1] -= 1;
            word.pop();
        }
        Ok(())
    }
}

fn as_word(letters: &[usize]) -> MultiIndex {
    MultiIndex::new(letters.to_vec()).expect("nonempty word")
}

fn check_alphabet(set: &IndexSet, e: &ExponentVector) -> Result<()> {
    if set.m() != e.m() {
        return Err(Error::InvalidArgument(format!(
            "index set alphabet {} does not match {} exponents",
            set.m(),
            e.m()
        )));
    }
    Ok(())
}

/// θ_Γ̃ = min over α ∉ Γ̃ of `Σ_i β_{α(i)} − 1`, with the minimizing word.
pub fn theta_of_with_witness(set: &IndexSet, beta: &ExponentVector) -> Result<(f64, MultiIndex)> {
    require_mode(beta, ExponentMode::Holder)?;
    check_alphabet(set, beta)?;
    let mut best = f64::INFINITY;
    let mut witness: Option<MultiIndex> = None;
    let mut walker = Walker::new(beta.m(), MAX_SEARCH_LEN);
    walker.run(&mut |w, c| {
        let value = beta.weight_of_counts(c) - 1.0;
        if value >= best {
            return Visit::Prune;
        }
        let word = as_word(w);
        if set.contains(&word) {
            Visit::Descend
        } else {
            best = value;
            witness = Some(word);
            Visit::Prune
        }
    })?;
    witness
        .map(|w| (best, w))
        .ok_or(Error::ComplementSearchExhausted(MAX_SEARCH_LEN))
}

pub fn theta_of(set: &IndexSet, beta: &ExponentVector) -> Result<f64> {
    theta_of_with_witness(set, beta).map(|(v, _)| v)
}

/// ρ_Γ̃ = min over α ∉ Γ̃ of `H_α − ϑ(α)`, with the minimizing word.
pub fn rho_of_with_witness(set: &IndexSet, h: &ExponentVector) -> Result<(f64, MultiIndex)> {
    require_mode(h, ExponentMode::Hurst)?;
    check_alphabet(set, h)?;
    let mut best = f64::INFINITY;
    let mut witness: Option<MultiIndex> = None;
    let mut walker = Walker::new(h.m(), MAX_SEARCH_LEN);
    walker.run(&mut |w, c| {
        let weight = h.weight_of_counts(c);
        // ϑ ≤ 1 bounds every extension from below
        if weight - 1.0 >= best {
            return Visit::Prune;
        }
        let word = as_word(w);
        if !set.contains(&word) {
            let value = weight - vartheta_counts(c, h);
            if value < best {
                best = value;
                witness = Some(word);
            }
        }
        Visit::Descend
    })?;
    witness
        .map(|w| (best, w))
        .ok_or(Error::ComplementSearchExhausted(MAX_SEARCH_LEN))
}

pub fn rho_of(set: &IndexSet, h: &ExponentVector) -> Result<f64> {
    rho_of_with_witness(set, h).map(|(v, _)| v)
}

fn check_m(e: &ExponentVector, m: usize) -> Result<()> {
    if e.m() != m {
        return Err(Error::InvalidArgument(format!(
            "alphabet size {m} does not match {} exponents",
            e.m()
        )));
    }
    Ok(())
}

/// Γ(θ) = {α : Σ_i β_{α(i)} − 1 < θ}, the best set for almost-sure rate θ.
///
/// θ must be attained by some word (`Σ_j k_j β_j − 1`). When θ does not
/// exceed `min_j β_j − 1` the set is empty and a warning is logged.
pub fn gamma_theta(theta: f64, beta: &ExponentVector, m: usize) -> Result<IndexSet> {
    require_mode(beta, ExponentMode::Holder)?;
    check_m(beta, m)?;
    if theta <= beta.min() - 1.0 + RATE_TOL {
        warn!("gamma_theta: rate {theta} admits no word, returning the empty set");
        return Ok(IndexSet::empty(m));
    }
    let mut members = Vec::new();
    let mut attained = false;
    Walker::new(m, MAX_SEARCH_LEN).run(&mut |w, c| {
        let value = beta.weight_of_counts(c) - 1.0;
        if value > theta + RATE_TOL {
            return Visit::Prune;
        }
        if (value - theta).abs() <= RATE_TOL {
            attained = true;
        } else {
            members.push(as_word(w));
        }
        Visit::Descend
    })?;
    if !attained {
        return Err(Error::InvalidArgument(format!(
            "rate {theta} is not of the form Σ k_j β_j − 1"
        )));
    }
    IndexSet::new(m, members)
}

/// Γ̂(ρ): words with `H_α − 1 < ρ` (r′ even) or `H_α − max H < ρ` (r′ odd).
pub fn gamma_rho(rho: f64, h: &ExponentVector, m: usize) -> Result<IndexSet> {
    require_mode(h, ExponentMode::Hurst)?;
    check_m(h, m)?;
    let mut members = Vec::new();
    let mut attained = false;
    Walker::new(m, MAX_SEARCH_LEN).run(&mut |w, c| {
        let weight = h.weight_of_counts(c);
        if weight - 1.0 > rho + RATE_TOL {
            return Visit::Prune;
        }
        let value = weight - vartheta_counts(c, h);
        if (value - rho).abs() <= RATE_TOL {
            attained = true;
        } else if value < rho {
            members.push(as_word(w));
        }
        Visit::Descend
    })?;
    if members.is_empty() {
        warn!("gamma_rho: rate {rho} admits no word, returning the empty set");
        return Ok(IndexSet::empty(m));
    }
    if !attained {
        return Err(Error::InvalidArgument(format!(
            "rate {rho} is not an admissible L_p rate for these exponents"
        )));
    }
    IndexSet::new(m, members)
}

/// The smallest admissible rate ρ′ strictly above ρ, and the correction set
/// Γ̂(ρ′) \ Γ̂(ρ) that receives deterministic mean terms in the modified scheme.
pub fn next_rate_and_correction_set(
    rho: f64,
    h: &ExponentVector,
    m: usize,
) -> Result<(f64, IndexSet)> {
    next_rate_with_horizon(rho, h, m, NEXT_RATE_HORIZON)
}

pub fn next_rate_with_horizon(
    rho: f64,
    h: &ExponentVector,
    m: usize,
    horizon: usize,
) -> Result<(f64, IndexSet)> {
    require_mode(h, ExponentMode::Hurst)?;
    check_m(h, m)?;
    let mut best = f64::INFINITY;
    let mut walker = Walker::new(m, horizon);
    walker.run(&mut |_, c| {
        let weight = h.weight_of_counts(c);
        if weight - 1.0 >= best {
            return Visit::Prune;
        }
        let value = weight - vartheta_counts(c, h);
        if value > rho + RATE_TOL && value < best {
            best = value;
        }
        Visit::Descend
    })?;
    if !best.is_finite() || walker.truncated {
        return Err(Error::ComplementSearchExhausted(horizon));
    }
    let upper = gamma_rho(best, h, m)?;
    let lower = gamma_rho(rho, h, m)?;
    Ok((best, upper.difference(&lower)))
}
