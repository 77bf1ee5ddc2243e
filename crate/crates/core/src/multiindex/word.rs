use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ceiling on the number of candidates any enumeration may visit.
pub const ENUMERATION_BUDGET: u64 = 10_000_000;

/// A nonempty word over the alphabet `{1, ..., m}`.
///
/// Letters are stored 1-based, exactly as they appear in index sets and
/// configuration files. Words order by length first, then lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(letters: Vec<usize>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidArgument("multi-index must be nonempty".into()));
        }
        if letters.iter().any(|&l| l == 0) {
            return Err(Error::InvalidArgument(format!(
                "letters are 1-based, got {letters:?}"
            )));
        }
        Ok(MultiIndex(letters))
    }

    /// Builds a word and checks every letter against the alphabet size.
    pub fn with_alphabet(letters: Vec<usize>, m: usize) -> Result<Self> {
        let w = Self::new(letters)?;
        w.check_alphabet(m)?;
        Ok(w)
    }

    pub fn single(letter: usize) -> Self {
        assert!(letter >= 1, "letters are 1-based");
        MultiIndex(vec![letter])
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Letter at 1-based position `i`.
    pub fn at(&self, i: usize) -> usize {
        self.0[i - 1]
    }

    pub fn max_letter(&self) -> usize {
        *self.0.iter().max().expect("nonempty")
    }

    pub fn check_alphabet(&self, m: usize) -> Result<()> {
        if m == 0 || self.max_letter() > m {
            return Err(Error::InvalidArgument(format!(
                "word {self} uses letters outside alphabet of size {m}"
            )));
        }
        Ok(())
    }

    /// Number of occurrences of `letter`.
    pub fn count(&self, letter: usize) -> usize {
        self.0.iter().filter(|&&l| l == letter).count()
    }

    /// Letter counts `r_1, ..., r_m`.
    pub fn counts(&self, m: usize) -> Vec<usize> {
        let mut c = vec![0; m];
        for &l in &self.0 {
            c[l - 1] += 1;
        }
        c
    }

    /// Concatenation `(self, other)`.
    pub fn concat(&self, other: &MultiIndex) -> MultiIndex {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        MultiIndex(v)
    }

    /// The subword of 1-based positions `from..=to`; `None` when empty.
    pub fn slice(&self, from: usize, to: usize) -> Option<MultiIndex> {
        if from > to || from == 0 {
            return None;
        }
        Some(MultiIndex(self.0[from - 1..to].to_vec()))
    }

    /// All words obtained by deleting exactly one letter (deduplicated, sorted).
    pub fn deletions(&self) -> Vec<MultiIndex> {
        if self.len() < 2 {
            return Vec::new();
        }
        let mut out: Vec<MultiIndex> = (0..self.len())
            .map(|i| {
                let mut v = self.0.clone();
                v.remove(i);
                MultiIndex(v)
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Dotted rendering used in CSV exports, e.g. `1.2.2`.
    pub fn dotted(&self) -> String {
        self.0
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }

    pub fn parse_dotted(s: &str) -> Result<Self> {
        let letters = s
            .split('.')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidArgument(format!("bad word {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters)
    }
}

impl TryFrom<Vec<usize>> for MultiIndex {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        MultiIndex::new(v)
    }
}

impl From<MultiIndex> for Vec<usize> {
    fn from(w: MultiIndex) -> Self {
        w.0
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// All `m^r` words of length `r`, in lexicographic order.
pub fn enumerate_gamma(r: usize, m: usize) -> Result<Vec<MultiIndex>> {
    enumerate_gamma_with_budget(r, m, ENUMERATION_BUDGET)
}

pub fn enumerate_gamma_with_budget(r: usize, m: usize, budget: u64) -> Result<Vec<MultiIndex>> {
    if r == 0 || m == 0 {
        return Err(Error::InvalidArgument(format!(
            "enumerate_gamma needs r >= 1 and m >= 1, got r={r}, m={m}"
        )));
    }
    let requested = (m as f64).powi(r as i32);
    if requested > budget as f64 {
        return Err(Error::EnumerationTooLarge { requested, budget });
    }
    let mut out = Vec::with_capacity(requested as usize);
    let mut cur = vec![1usize; r];
    loop {
        out.push(MultiIndex(cur.clone()));
        // odometer increment, last letter fastest
        let mut pos = r;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            if cur[pos] < m {
                cur[pos] += 1;
                for c in cur.iter_mut().skip(pos + 1) {
                    *c = 1;
                }
                break;
            }
        }
    }
}

/// `alpha ⋐ alpha_prime`: `alpha` arises from `alpha_prime` by deleting one letter.
pub fn contains(alpha: &MultiIndex, alpha_prime: &MultiIndex) -> Result<bool> {
    if alpha_prime.len() != alpha.len() + 1 {
        return Err(Error::InvalidArgument(format!(
            "containment needs |alpha'| = |alpha| + 1, got {} and {}",
            alpha.len(),
            alpha_prime.len()
        )));
    }
    // greedy subsequence match
    let mut it = alpha_prime.letters().iter();
    Ok(alpha
        .letters()
        .iter()
        .all(|a| it.by_ref().any(|b| b == a)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn gamma_small_cases() {
        assert_eq!(enumerate_gamma(1, 3).unwrap(), vec![w(&[1]), w(&[2]), w(&[3])]);
        assert_eq!(
            enumerate_gamma(2, 2).unwrap(),
            vec![w(&[1, 1]), w(&[1, 2]), w(&[2, 1]), w(&[2, 2])]
        );
        assert_eq!(enumerate_gamma(3, 2).unwrap().len(), 8);
    }

    #[test]
    fn gamma_budget() {
        let err = enumerate_gamma_with_budget(30, 10, 1000).unwrap_err();
        assert!(matches!(err, Error::EnumerationTooLarge { .. }));
        assert!(enumerate_gamma(0, 2).is_err());
    }

    #[test]
    fn containment_examples() {
        assert!(contains(&w(&[1]), &w(&[1, 2])).unwrap());
        assert!(contains(&w(&[1, 2]), &w(&[2, 1, 2])).unwrap());
        assert!(!contains(&w(&[1, 1]), &w(&[2, 2, 2])).unwrap());
        assert!(contains(&w(&[1]), &w(&[1, 2, 3])).is_err());
    }

    #[test]
    fn ordering_is_graded() {
        let mut v = vec![w(&[2]), w(&[1, 1]), w(&[1])];
        v.sort();
        assert_eq!(v, vec![w(&[1]), w(&[2]), w(&[1, 1])]);
    }

    #[test]
    fn dotted_round_trip() {
        let a = w(&[1, 2, 2]);
        assert_eq!(a.dotted(), "1.2.2");
        assert_eq!(MultiIndex::parse_dotted("1.2.2").unwrap(), a);
        assert!(MultiIndex::new(vec![]).is_err());
        assert!(MultiIndex::new(vec![0, 1]).is_err());
    }

    #[test]
    fn deletions_dedup() {
        assert_eq!(w(&[1, 1, 2]).deletions(), vec![w(&[1, 1]), w(&[1, 2])]);
        assert!(w(&[3]).deletions().is_empty());
    }
}
