use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::word::{enumerate_gamma, MultiIndex};
use crate::error::{Error, Result};

/// A finite set of words Γ̃ over an alphabet of size `m`.
///
/// Sets produced by the rate constructors may be empty (see
/// [`gamma_theta`](super::gamma_theta)); solvers reject empty sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawIndexSet", into = "RawIndexSet")]
pub struct IndexSet {
    m: usize,
    members: BTreeSet<MultiIndex>,
}

#[derive(Serialize, Deserialize)]
struct RawIndexSet {
    m: usize,
    members: Vec<MultiIndex>,
}

impl TryFrom<RawIndexSet> for IndexSet {
    type Error = Error;
    fn try_from(raw: RawIndexSet) -> Result<Self> {
        IndexSet::new(raw.m, raw.members)
    }
}

impl From<IndexSet> for RawIndexSet {
    fn from(s: IndexSet) -> Self {
        RawIndexSet {
            m: s.m,
            members: s.members.into_iter().collect(),
        }
    }
}

impl IndexSet {
    pub fn new(m: usize, members: impl IntoIterator<Item = MultiIndex>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("alphabet size must be >= 1".into()));
        }
        let members: BTreeSet<MultiIndex> = members.into_iter().collect();
        for w in &members {
            w.check_alphabet(m)?;
        }
        Ok(IndexSet { m, members })
    }

    pub fn empty(m: usize) -> Self {
        IndexSet {
            m,
            members: BTreeSet::new(),
        }
    }

    /// `{(1), ..., (m)}`: the Euler set.
    pub fn singletons(m: usize) -> Self {
        IndexSet {
            m,
            members: (1..=m).map(MultiIndex::single).collect(),
        }
    }

    /// `{α : |α| ≤ n}`: the complete order-`n` Taylor set.
    pub fn complete(m: usize, n: usize) -> Result<Self> {
        let mut members = BTreeSet::new();
        for r in 1..=n {
            members.extend(enumerate_gamma(r, m)?);
        }
        Ok(IndexSet { m, members })
    }

    /// Parses the compact form `"1;2;2.2"`.
    pub fn parse(m: usize, s: &str) -> Result<Self> {
        let words = s
            .split(';')
            .filter(|t| !t.trim().is_empty())
            .map(MultiIndex::parse_dotted)
            .collect::<Result<Vec<_>>>()?;
        Self::new(m, words)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, w: &MultiIndex) -> bool {
        self.members.contains(w)
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.members.iter()
    }

    /// N = max |α| over members (0 for the empty set).
    pub fn max_len(&self) -> usize {
        self.members.iter().map(MultiIndex::len).max().unwrap_or(0)
    }

    pub fn insert(&mut self, w: MultiIndex) -> Result<bool> {
        w.check_alphabet(self.m)?;
        Ok(self.members.insert(w))
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        IndexSet {
            m: self.m.max(other.m),
            members: self.members.union(&other.members).cloned().collect(),
        }
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet {
            m: self.m,
            members: self.members.difference(&other.members).cloned().collect(),
        }
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.members.is_subset(&other.members)
    }

    /// Hierarchical structure: the complement is closed under one-letter
    /// insertion. Checked through the contrapositive on the finite member
    /// list: every one-letter deletion of a member is again a member.
    /// `probe_depth` must be at least `N + 1`.
    pub fn is_hierarchical(&self, probe_depth: usize) -> Result<bool> {
        if probe_depth < self.max_len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "probe depth {probe_depth} below N + 1 = {}",
                self.max_len() + 1
            )));
        }
        Ok(self.first_hierarchy_violation().is_none())
    }

    /// A member together with a deletion of it that is missing from the set.
    pub fn first_hierarchy_violation(&self) -> Option<(MultiIndex, MultiIndex)> {
        self.members.iter().find_map(|w| {
            w.deletions()
                .into_iter()
                .find(|d| !self.members.contains(d))
                .map(|d| (w.clone(), d))
        })
    }

    pub fn hierarchical(&self) -> bool {
        self.first_hierarchy_violation().is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn hierarchy_examples() {
        let full = IndexSet::complete(2, 3).unwrap();
        assert!(full.is_hierarchical(4).unwrap());
        let s = IndexSet::new(2, vec![w(&[1]), w(&[2]), w(&[1, 2])]).unwrap();
        assert!(s.is_hierarchical(3).unwrap());
        let bad = IndexSet::new(2, vec![w(&[1, 2])]).unwrap();
        assert!(!bad.is_hierarchical(3).unwrap());
        assert_eq!(bad.first_hierarchy_violation(), Some((w(&[1, 2]), w(&[1]))));
        assert!(full.is_hierarchical(2).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = IndexSet::new(2, vec![w(&[2, 2]), w(&[1]), w(&[2])]).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(js, r#"{"m":2,"members":[[1],[2],[2,2]]}"#);
        let back: IndexSet = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<IndexSet>(r#"{"m":1,"members":[[2]]}"#).is_err());
    }

    #[test]
    fn parse_compact() {
        let s = IndexSet::parse(2, "1;2;2.2").unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.contains(&w(&[2, 2])));
    }
}
