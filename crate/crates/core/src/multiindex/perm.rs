//! Shuffle-type permutation families.
//!
//! Permutations act on positions `{1, ..., r}`. Internally images are kept
//! 0-based; every public constructor taking constraint sequences (`ls`,
//! `taus`) uses the 1-based convention of the index words.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::word::{MultiIndex, ENUMERATION_BUDGET};
use crate::error::{Error, Result};

/// A bijection on `{1, ..., r}`, stored 0-based.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(r: usize) -> Self {
        Permutation((0..r).collect())
    }

    /// From 0-based images; checks bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let r = images.len();
        let mut seen = vec![false; r];
        for &i in &images {
            if i >= r || seen[i] {
                return Err(Error::InvalidArgument(format!(
                    "not a permutation: {images:?}"
                )));
            }
            seen[i] = true;
        }
        Ok(Permutation(images))
    }

    /// From 1-based images, as written in the literature.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.iter().any(|&i| i == 0) {
            return Err(Error::InvalidArgument("1-based images expected".into()));
        }
        Self::from_images(images.iter().map(|i| i - 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 0-based images.
    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// Image of the 1-based position `i`, 1-based.
    pub fn at(&self, i: usize) -> usize {
        self.0[i - 1] + 1
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&j| self.0[j]).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `alpha ∘ self = (alpha_{ρ(1)}, ..., alpha_{ρ(r)})`.
    pub fn permute_word(&self, alpha: &MultiIndex) -> MultiIndex {
        assert_eq!(alpha.len(), self.len(), "word/permutation length mismatch");
        let letters = self.0.iter().map(|&j| alpha.letters()[j]).collect();
        MultiIndex::new(letters).expect("nonempty")
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, j) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", j + 1)?;
        }
        write!(f, "]")
    }
}

/// Validates `1 <= s_1 < ... < s_p = r` (1-based) and returns `r`.
pub fn check_increasing_to(seq: &[usize], name: &str) -> Result<usize> {
    let Some(&last) = seq.last() else {
        return Err(Error::InvalidArgument(format!("{name} must be nonempty")));
    };
    if seq[0] == 0 || seq.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "{name} must satisfy 1 <= s_1 < ... < s_p, got {seq:?}"
        )));
    }
    Ok(last)
}

/// All strictly increasing sequences `1 <= s_1 < ... < s_p = r`, every `p`.
pub fn increasing_sequences(r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(1 << (r.saturating_sub(1)));
    for p in 1..=r {
        for mut c in (1..r).combinations(p - 1) {
            c.push(r);
            out.push(c);
        }
    }
    out
}

fn check_factorial_budget(r: usize) -> Result<()> {
    let requested: f64 = (1..=r).map(|k| k as f64).product();
    if requested > ENUMERATION_BUDGET as f64 {
        return Err(Error::EnumerationTooLarge {
            requested,
            budget: ENUMERATION_BUDGET,
        });
    }
    Ok(())
}

/// Sh(γ′, γ″): permutations of `{1..r′+r″}` preserving the internal order of
/// the first `r′` and the last `r″` positions.
pub fn shuffles(gamma1: &MultiIndex, gamma2: &MultiIndex) -> Result<Vec<Permutation>> {
    Ok(shuffles_by_len(gamma1.len(), gamma2.len()))
}

pub fn shuffles_by_len(r1: usize, r2: usize) -> Vec<Permutation> {
    let r = r1 + r2;
    let mut out: Vec<Permutation> = (0..r)
        .combinations(r1)
        .map(|first| {
            let mut images = vec![0; r];
            let mut rest = (0..r).filter(|i| !first.contains(i));
            for (y, &pos) in first.iter().enumerate() {
                images[y] = pos;
            }
            for y in r1..r {
                images[y] = rest.next().expect("complement size");
            }
            Permutation(images)
        })
        .collect();
    out.sort();
    out
}

/// Blocks `I_i = {τ_{i−1}+1, ..., τ_i}` as 0-based block labels per position.
fn block_labels(taus: &[usize]) -> Vec<usize> {
    let r = *taus.last().expect("nonempty");
    let mut labels = vec![0; r];
    let mut start = 0;
    for (b, &end) in taus.iter().enumerate() {
        for l in labels.iter_mut().take(end).skip(start) {
            *l = b;
        }
        start = end;
    }
    labels
}

/// Ξ_r(τ⃗): permutations keeping the order of the block ends `τ_1, ..., τ_p`
/// (Rule 4) and the order inside every block (Rule 5).
///
/// Built constructively: a member is determined by which target positions
/// each block occupies, and Rule 4 requires the last position taken by block
/// `i` to precede the last one taken by block `i + 1`.
pub fn xi_set(taus: &[usize]) -> Result<Vec<Permutation>> {
    let r = check_increasing_to(taus, "taus")?;
    let p = taus.len();
    let mut sizes = Vec::with_capacity(p);
    let mut prev = 0;
    for &t in taus {
        sizes.push(t - prev);
        prev = t;
    }
    let starts: Vec<usize> = taus.iter().scan(0, |s, &t| {
        let st = *s;
        *s = t;
        Some(st)
    }).collect();

    let mut out = Vec::new();
    let mut remaining = sizes.clone();
    let mut seq = Vec::with_capacity(r);
    fill_labels(&mut remaining, &mut seq, r, &mut |labels: &[usize]| {
        // labels[pos] = block occupying target position pos
        let mut next = starts.clone();
        let mut images = vec![0; r];
        for (pos, &b) in labels.iter().enumerate() {
            images[next[b]] = pos;
            next[b] += 1;
        }
        out.push(Permutation(images));
    });
    out.sort();
    Ok(out)
}

fn fill_labels(
    remaining: &mut [usize],
    seq: &mut Vec<usize>,
    r: usize,
    emit: &mut dyn FnMut(&[usize]),
) {
    if seq.len() == r {
        emit(seq);
        return;
    }
    for b in 0..remaining.len() {
        if remaining[b] == 0 {
            continue;
        }
        // placing the final element of block b requires all earlier blocks finished
        if remaining[b] == 1 && remaining[..b].iter().any(|&c| c > 0) {
            continue;
        }
        remaining[b] -= 1;
        seq.push(b);
        fill_labels(remaining, seq, r, emit);
        seq.pop();
        remaining[b] += 1;
    }
}

/// Ξ_r(l⃗; τ⃗): members of Ξ_r(τ⃗) with `ρ(τ_i) = l_i`. May be empty.
pub fn xi_with_constraints(ls: &[usize], taus: &[usize]) -> Result<Vec<Permutation>> {
    check_pair(ls, taus)?;
    Ok(xi_set(taus)?
        .into_iter()
        .filter(|rho| ls.iter().zip(taus).all(|(&l, &t)| rho.at(t) == l))
        .collect())
}

fn check_pair(ls: &[usize], taus: &[usize]) -> Result<usize> {
    let r1 = check_increasing_to(ls, "ls")?;
    let r2 = check_increasing_to(taus, "taus")?;
    if r1 != r2 || ls.len() != taus.len() {
        return Err(Error::InvalidArgument(format!(
            "ls {ls:?} and taus {taus:?} must have equal length and end at the same r"
        )));
    }
    Ok(r1)
}

/// Rule 1: `μ(l_i) < μ(l_{i+1})`.
pub fn satisfies_rule1(mu: &Permutation, ls: &[usize]) -> bool {
    ls.windows(2).all(|w| mu.at(w[0]) < mu.at(w[1]))
}

/// Rule 2 with respect to the μ-dependent partition
/// `I_1 = {1..μ(l_1)}, I_i = {μ(l_{i−1})+1..μ(l_i)}`, which must cover `{1..r}`.
pub fn satisfies_rule2(mu: &Permutation, ls: &[usize]) -> bool {
    let r = mu.len();
    let ends: Vec<usize> = ls.iter().map(|&l| mu.at(l)).collect();
    if ends.last() != Some(&r) || ends.windows(2).any(|w| w[0] >= w[1]) {
        return false;
    }
    let labels = block_labels(&ends);
    // preimages in increasing order must have increasing images inside each block
    let mut last: Vec<Option<usize>> = vec![None; ends.len()];
    for y in 0..r {
        let v = mu.images()[y];
        let b = labels[v];
        if let Some(prev) = last[b] {
            if prev > v {
                return false;
            }
        }
        last[b] = Some(v);
    }
    true
}

/// Rule 3: `μ(l_{i−1}) < μ(y)` whenever `l_{i−1} < y < l_i` (with `l_0 = 0`
/// imposing nothing).
pub fn satisfies_rule3(mu: &Permutation, ls: &[usize]) -> bool {
    for i in 1..ls.len() {
        let lo = ls[i - 1];
        for y in lo + 1..ls[i] {
            if mu.at(lo) >= mu.at(y) {
                return false;
            }
        }
    }
    true
}

/// Rules 4 and 5 for a candidate member of Ξ_r(τ⃗).
pub fn satisfies_rules45(rho: &Permutation, taus: &[usize]) -> bool {
    let rule4 = taus.windows(2).all(|w| rho.at(w[0]) < rho.at(w[1]));
    let labels = block_labels(taus);
    let rule5 = (1..rho.len()).all(|y| labels[y - 1] != labels[y] || rho.images()[y - 1] < rho.images()[y]);
    rule4 && rule5
}

/// Θ_r(l⃗): all μ on `{1..r}` satisfying Rules 1 and 2, by filtering `S_r`.
pub fn theta_set(ls: &[usize]) -> Result<Vec<Permutation>> {
    let r = check_increasing_to(ls, "ls")?;
    check_factorial_budget(r)?;
    Ok((0..r)
        .permutations(r)
        .map(Permutation)
        .filter(|mu| satisfies_rule1(mu, ls) && satisfies_rule2(mu, ls))
        .collect())
}

/// Θ_r(l⃗; τ⃗): members of Θ_r(l⃗) with `μ(l_i) = τ_i`. May be empty.
pub fn theta_with_constraints(ls: &[usize], taus: &[usize]) -> Result<Vec<Permutation>> {
    check_pair(ls, taus)?;
    Ok(theta_set(ls)?
        .into_iter()
        .filter(|mu| ls.iter().zip(taus).all(|(&l, &t)| mu.at(l) == t))
        .collect())
}

/// True iff Ξ_r(l⃗; τ⃗) equals the set of inverses of Θ_r(l⃗; τ⃗).
pub fn check_duality(ls: &[usize], taus: &[usize]) -> Result<bool> {
    let xi = xi_with_constraints(ls, taus)?;
    let mut inv: Vec<Permutation> = theta_with_constraints(ls, taus)?
        .iter()
        .map(Permutation::inverse)
        .collect();
    inv.sort();
    Ok(xi == inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_xi(taus: &[usize]) -> Vec<Permutation> {
        let r = *taus.last().unwrap();
        (0..r)
            .permutations(r)
            .map(Permutation)
            .filter(|rho| satisfies_rules45(rho, taus))
            .collect()
    }

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn shuffle_counts() {
        let a = MultiIndex::new(vec![1]).unwrap();
        let b = MultiIndex::new(vec![2]).unwrap();
        let sh = shuffles(&a, &b).unwrap();
        assert_eq!(sh.len(), 2);
        assert!(sh.iter().any(|p| p.is_identity()));
        assert_eq!(shuffles_by_len(2, 1).len(), 3);
        assert_eq!(shuffles_by_len(2, 2).len(), 6);
        for r1 in 1..=5 {
            for r2 in 1..=5 {
                assert_eq!(shuffles_by_len(r1, r2).len(), binom(r1 + r2, r1));
            }
        }
    }

    #[test]
    fn shuffles_match_brute_force() {
        // filter S_3 by order preservation of {1,2} and {3}
        let brute: Vec<Permutation> = (0..3)
            .permutations(3)
            .map(Permutation)
            .filter(|p| p.images()[0] < p.images()[1])
            .collect();
        assert_eq!(shuffles_by_len(2, 1), brute);
    }

    #[test]
    fn xi_singleton_cases() {
        for r in 1..=6 {
            let all: Vec<usize> = (1..=r).collect();
            assert_eq!(xi_set(&all).unwrap(), vec![Permutation::identity(r)]);
            assert_eq!(xi_set(&[r]).unwrap(), vec![Permutation::identity(r)]);
        }
    }

    #[test]
    fn xi_matches_brute_force() {
        for r in 1..=6 {
            for taus in increasing_sequences(r) {
                let fast = xi_set(&taus).unwrap();
                assert_eq!(fast, brute_xi(&taus), "taus={taus:?}");
                assert!(fast.iter().all(|rho| rho.at(r) == r));
                assert!(fast.contains(&Permutation::identity(r)));
            }
        }
        // taus = (1,3): ρ(1) < ρ(3), ρ(2) < ρ(3) ⇒ ρ(3) = 3, two members
        assert_eq!(xi_set(&[1, 3]).unwrap().len(), 2);
    }

    #[test]
    fn theta_identity_case() {
        for r in 1..=6 {
            let all: Vec<usize> = (1..=r).collect();
            assert_eq!(theta_set(&all).unwrap(), vec![Permutation::identity(r)]);
        }
    }

    #[test]
    fn duality_small() {
        for r in 1..=5 {
            for ls in increasing_sequences(r) {
                for taus in increasing_sequences(r).into_iter().filter(|t| t.len() == ls.len()) {
                    assert!(check_duality(&ls, &taus).unwrap(), "ls={ls:?} taus={taus:?}");
                }
            }
        }
    }

    #[test]
    fn constrained_identity() {
        let all: Vec<usize> = (1..=4).collect();
        assert_eq!(xi_with_constraints(&all, &all).unwrap(), vec![Permutation::identity(4)]);
        assert_eq!(theta_with_constraints(&all, &all).unwrap(), vec![Permutation::identity(4)]);
    }

    #[test]
    fn bad_sequences_rejected() {
        assert!(xi_set(&[2, 2]).is_err());
        assert!(xi_set(&[]).is_err());
        assert!(xi_with_constraints(&[1, 3], &[3]).is_err());
    }

    #[test]
    fn inverse_and_compose() {
        let p = Permutation::from_one_based(&[2, 3, 1]).unwrap();
        assert!(p.compose(&p.inverse()).is_identity());
        let alpha = MultiIndex::new(vec![7, 8, 9]).unwrap();
        assert_eq!(p.permute_word(&alpha).letters(), &[8, 9, 7]);
        assert!(Permutation::from_one_based(&[1, 1]).is_err());
    }
}
