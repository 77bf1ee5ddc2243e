use serde::{Deserialize, Serialize};

use super::word::MultiIndex;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExponentMode {
    /// Hölder exponents β_j ∈ (1/2, 1].
    Holder,
    /// Hurst exponents; `H_1 = 1` marks letter 1 as the time component.
    Hurst,
}

/// Per-letter regularity exponents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawExponents")]
pub struct ExponentVector {
    pub mode: ExponentMode,
    pub values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawExponents {
    mode: ExponentMode,
    values: Vec<f64>,
}

impl TryFrom<RawExponents> for ExponentVector {
    type Error = Error;
    fn try_from(raw: RawExponents) -> Result<Self> {
        ExponentVector::new(raw.mode, raw.values)
    }
}

impl ExponentVector {
    pub fn new(mode: ExponentMode, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("exponent vector is empty".into()));
        }
        for (j, &v) in values.iter().enumerate() {
            let ok = match mode {
                ExponentMode::Holder => v > 0.5 && v <= 1.0,
                ExponentMode::Hurst => (v > 0.5 && v < 1.0) || (j == 0 && v == 1.0),
            };
            if !ok || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "exponent {v} for letter {} is outside the admissible range for {mode:?}",
                    j + 1
                )));
            }
        }
        Ok(ExponentVector { mode, values })
    }

    pub fn holder(values: Vec<f64>) -> Result<Self> {
        Self::new(ExponentMode::Holder, values)
    }

    pub fn hurst(values: Vec<f64>) -> Result<Self> {
        Self::new(ExponentMode::Hurst, values)
    }

    /// `m` fBm letters sharing one Hurst exponent, optionally preceded by the time letter.
    pub fn uniform_hurst(h: f64, fbm_letters: usize, with_time: bool) -> Result<Self> {
        let mut v = Vec::with_capacity(fbm_letters + 1);
        if with_time {
            v.push(1.0);
        }
        v.extend(std::iter::repeat(h).take(fbm_letters));
        Self::hurst(v)
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, letter: usize) -> f64 {
        self.values[letter - 1]
    }

    /// Letter 1 carries exponent exactly 1: the identity path t ↦ t.
    pub fn is_time(&self, letter: usize) -> bool {
        letter == 1 && self.values[0] == 1.0
    }

    pub fn has_time_letter(&self) -> bool {
        self.is_time(1)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest exponent among non-time letters, if any.
    pub fn max_noise(&self) -> Option<f64> {
        (1..=self.m())
            .filter(|&j| !self.is_time(j))
            .map(|j| self.value(j))
            .reduce(f64::max)
    }

    /// Σ_j r_j v_j summed over letters in a fixed order so that words with
    /// equal letter counts produce bitwise-equal sums.
    pub fn weight_of_counts(&self, counts: &[usize]) -> f64 {
        counts
            .iter()
            .zip(&self.values)
            .map(|(&c, &v)| c as f64 * v)
            .sum()
    }

    pub fn weight(&self, alpha: &MultiIndex) -> f64 {
        self.weight_of_counts(&alpha.counts(self.m()))
    }

    /// Hölder view of a Hurst vector: β_j = H_j − δ for noise letters, β = 1 for time.
    pub fn to_holder(&self, delta: f64) -> Result<Self> {
        let values = (1..=self.m())
            .map(|j| if self.is_time(j) { 1.0 } else { self.value(j) - delta })
            .collect();
        Self::holder(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ExponentVector::hurst(vec![1.0, 0.7]).is_ok());
        assert!(ExponentVector::hurst(vec![0.7, 1.0]).is_err());
        assert!(ExponentVector::hurst(vec![0.4]).is_err());
        assert!(ExponentVector::holder(vec![1.0, 0.6]).is_ok());
        assert!(ExponentVector::holder(vec![1.2]).is_err());
        assert!(ExponentVector::holder(vec![]).is_err());
    }

    #[test]
    fn time_letter_detection() {
        let h = ExponentVector::uniform_hurst(0.7, 2, true).unwrap();
        assert!(h.is_time(1) && !h.is_time(2));
        assert_eq!(h.max_noise(), Some(0.7));
        let b = h.to_holder(0.02).unwrap();
        assert_eq!(b.values[0], 1.0);
        assert!(b.values[1..].iter().all(|v| (v - 0.68).abs() < 1e-12));
    }

    #[test]
    fn json_shape() {
        let e: ExponentVector =
            serde_json::from_str(r#"{"mode":"hurst","values":[1.0,0.7]}"#).unwrap();
        assert_eq!(e.mode, ExponentMode::Hurst);
        assert!(serde_json::from_str::<ExponentVector>(r#"{"mode":"hurst","values":[1.5]}"#).is_err());
    }
}
