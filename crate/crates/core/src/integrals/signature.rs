//! Truncated tensor series of iterated integrals and Chen's identity.

use crate::multiindex::MultiIndex;

/// Iterated integrals of every word up to length `depth` over one interval.
///
/// Level `l` stores `m^l` values; the word `(a_1, …, a_l)` sits at the
/// big-endian index `Σ (a_i − 1) m^{l−i}`, so `a_1` (the earliest
/// integration variable) is the most significant digit.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    m: usize,
    levels: Vec<Vec<f64>>,
}

impl Signature {
    /// The signature of a constant path: 1 at level 0, zero elsewhere.
    pub fn identity(m: usize, depth: usize) -> Self {
        let mut levels = Vec::with_capacity(depth + 1);
        levels.push(vec![1.0]);
        let mut size = 1;
        for _ in 0..depth {
            size *= m;
            levels.push(vec![0.0; size]);
        }
        Signature { m, levels }
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn alphabet(&self) -> usize {
        self.m
    }

    pub fn level(&self, l: usize) -> &[f64] {
        &self.levels[l]
    }

    pub fn index(m: usize, word: &[usize]) -> usize {
        word.iter().fold(0, |acc, &a| acc * m + (a - 1))
    }

    /// `x^α` for `|α| ≤ depth`.
    pub fn get(&self, alpha: &MultiIndex) -> f64 {
        self.get_letters(alpha.letters())
    }

    pub fn get_letters(&self, word: &[usize]) -> f64 {
        self.levels[word.len()][Self::index(self.m, word)]
    }

    /// Extend the interval by a straight segment with increment `delta`:
    /// `S ← S ⊗ exp(δ)`, evaluated level by level with Horner's scheme.
    pub fn push_segment(&mut self, delta: &[f64]) {
        debug_assert_eq!(delta.len(), self.m);
        let m = self.m;
        let depth = self.depth();
        let mut acc: Vec<f64> = Vec::new();
        let mut next: Vec<f64> = Vec::new();
        for l in (1..=depth).rev() {
            // acc ← ((S⁰ δ/l + S¹) δ/(l−1) + …) δ/1, then add into S^l
            acc.clear();
            acc.push(1.0);
            for k in 1..=l {
                let c = 1.0 / (l - k + 1) as f64;
                next.clear();
                next.reserve(acc.len() * m);
                for &a in &acc {
                    for &d in delta {
                        next.push(a * d * c);
                    }
                }
                if k < l {
                    for (x, s) in next.iter_mut().zip(&self.levels[k]) {
                        *x += s;
                    }
                }
                std::mem::swap(&mut acc, &mut next);
            }
            for (s, a) in self.levels[l].iter_mut().zip(&acc) {
                *s += a;
            }
        }
    }

    /// Chen's identity: the signature over `[s, u]` from those over
    /// `[s, t]` (self) and `[t, u]` (other).
    pub fn chen(&self, other: &Signature) -> Signature {
        assert_eq!(self.m, other.m);
        let depth = self.depth().min(other.depth());
        let mut out = Signature::identity(self.m, depth);
        for l in 1..=depth {
            let dst = &mut out.levels[l];
            for k in 0..=l {
                let a = &self.levels[k];
                let b = &other.levels[l - k];
                let stride = b.len();
                for (i, &x) in a.iter().enumerate() {
                    if x == 0.0 {
                        continue;
                    }
                    let row = &mut dst[i * stride..(i + 1) * stride];
                    for (r, &y) in row.iter_mut().zip(b) {
                        *r += x * y;
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_segment_is_exponential() {
        let mut s = Signature::identity(2, 3);
        s.push_segment(&[2.0, -1.0]);
        assert_eq!(s.get_letters(&[1]), 2.0);
        assert_eq!(s.get_letters(&[1, 2]), -1.0);
        assert!((s.get_letters(&[1, 1, 2]) - 4.0 * -1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn chen_matches_sequential_pushes() {
        let segs = [[0.3, -0.2], [0.1, 0.5], [-0.4, 0.25]];
        let mut whole = Signature::identity(2, 4);
        for d in &segs {
            whole.push_segment(d);
        }
        let mut left = Signature::identity(2, 4);
        left.push_segment(&segs[0]);
        let mut right = Signature::identity(2, 4);
        right.push_segment(&segs[1]);
        right.push_segment(&segs[2]);
        let joined = left.chen(&right);
        for l in 0..=4 {
            for (a, b) in whole.level(l).iter().zip(joined.level(l)) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }
}
