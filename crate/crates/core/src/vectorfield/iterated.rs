//! Iterated vector fields `𝒱_γ I(y) = 𝒱_{γ(1)}⋯𝒱_{γ(r)} I(y)` by jet
//! propagation, with the rightmost operator acting first.

use std::collections::HashMap;
use std::sync::Arc;

use super::jet::{Jet, JetBasis};
use super::oracle::JetOracle;
use crate::error::{Error, Result};
use crate::multiindex::{check_increasing_to, MultiIndex};

/// A tangent vector at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldValue(pub Vec<f64>);

impl FieldValue {
    pub fn components(&self) -> &[f64] {
        &self.0
    }

    /// 1-based component.
    pub fn component(&self, i: usize) -> f64 {
        self.0[i - 1]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Jets of every `V_j^i` around one point.
#[derive(Debug, Clone)]
pub struct FieldJets {
    basis: Arc<JetBasis>,
    m: usize,
    // v[j-1][i-1]
    v: Vec<Vec<Jet>>,
}

impl FieldJets {
    pub fn new(oracle: &dyn JetOracle, basis: Arc<JetBasis>, y: &[f64]) -> Result<Self> {
        let order = basis.order();
        if oracle.max_order() < order {
            return Err(Error::DerivativeOrderUnavailable {
                requested: order,
                available: oracle.max_order(),
            });
        }
        if y.len() != oracle.dimension() || basis.dim() != oracle.dimension() {
            return Err(Error::InvalidArgument(format!(
                "point of dimension {} for a field on R^{}",
                y.len(),
                oracle.dimension()
            )));
        }
        let (d, m) = (oracle.dimension(), oracle.alphabet());
        let v = (1..=m)
            .map(|j| (1..=d).map(|i| oracle.jet(j, i, y, &basis, order)).collect())
            .collect();
        Ok(FieldJets { basis, m, v })
    }

    pub fn basis(&self) -> &JetBasis {
        &self.basis
    }

    pub fn order(&self) -> usize {
        self.basis.order()
    }

    pub fn alphabet(&self) -> usize {
        self.m
    }

    /// Jet of `V_j^i`, 1-based.
    pub fn field(&self, j: usize, i: usize) -> &Jet {
        &self.v[j - 1][i - 1]
    }

    /// `𝒱_j f = Σ_i V_j^i ∂_i f`; one order is lost.
    pub fn apply(&self, j: usize, f: &Jet) -> Jet {
        let b = &*self.basis;
        let mut out = b.constant(f.order() - 1, 0.0);
        for (i, vji) in self.v[j - 1].iter().enumerate() {
            b.mul_add(&mut out, vji, &b.partial(f, i));
        }
        out
    }

    /// `𝒱_{w(1)}⋯𝒱_{w(k)} f`, rightmost first.
    pub fn apply_word(&self, word: &[usize], f: &Jet) -> Jet {
        let mut g = f.clone();
        for &j in word.iter().rev() {
            g = self.apply(j, &g);
        }
        g
    }
}

/// Per-point evaluator of `𝒱_γ I` for many words, sharing work between
/// words with a common suffix. Create once per solve and call
/// [`IteratedFields::at`] at every step; the suffix cache is cleared there.
pub struct IteratedFields<'a> {
    oracle: &'a dyn JetOracle,
    basis: Arc<JetBasis>,
    max_len: usize,
    jets: Option<FieldJets>,
    memo: HashMap<Vec<usize>, Vec<Jet>>,
}

impl<'a> IteratedFields<'a> {
    pub fn new(oracle: &'a dyn JetOracle, max_len: usize) -> Result<Self> {
        let order = max_len.max(1) - 1;
        if oracle.max_order() < order {
            return Err(Error::DerivativeOrderUnavailable {
                requested: order,
                available: oracle.max_order(),
            });
        }
        Ok(IteratedFields {
            oracle,
            basis: Arc::new(JetBasis::new(oracle.dimension(), order)),
            max_len: max_len.max(1),
            jets: None,
            memo: HashMap::new(),
        })
    }

    pub fn at(&mut self, y: &[f64]) -> Result<()> {
        self.memo.clear();
        self.jets = Some(FieldJets::new(self.oracle, self.basis.clone(), y)?);
        Ok(())
    }

    fn suffix_jets(&mut self, suffix: &[usize]) -> Vec<Jet> {
        if let Some(j) = self.memo.get(suffix) {
            return j.clone();
        }
        let jets = self.jets.as_ref().expect("IteratedFields::at not called");
        let out: Vec<Jet> = if suffix.len() == 1 {
            let d = self.oracle.dimension();
            (1..=d).map(|i| jets.field(suffix[0], i).clone()).collect()
        } else {
            let inner = self.suffix_jets(&suffix[1..]);
            let jets = self.jets.as_ref().unwrap();
            inner.iter().map(|f| jets.apply(suffix[0], f)).collect()
        };
        self.memo.insert(suffix.to_vec(), out.clone());
        out
    }

    /// `𝒱_γ I` at the current point.
    pub fn value(&mut self, gamma: &MultiIndex) -> Result<FieldValue> {
        if gamma.len() > self.max_len {
            return Err(Error::DerivativeOrderUnavailable {
                requested: gamma.len() - 1,
                available: self.basis.order(),
            });
        }
        gamma.check_alphabet(self.oracle.alphabet())?;
        let jets = self.suffix_jets(gamma.letters());
        Ok(FieldValue(jets.iter().map(Jet::value).collect()))
    }
}

/// `(𝒱_γ I^1(y), …, 𝒱_γ I^d(y))`.
pub fn iterated_field(oracle: &dyn JetOracle, gamma: &MultiIndex, y: &[f64]) -> Result<FieldValue> {
    let mut it = IteratedFields::new(oracle, gamma.len())?;
    it.at(y)?;
    it.value(gamma)
}

/// `H(α, ζ, τ⃗)(y) = Π_i 𝒱_{α_{τ_{i−1},τ_i}} V^{ζ_i}_{α(τ_i)}(y)`, where
/// `α_{a,b} = (α(a+1), …, α(b−1))` and `τ_0 = 0`.
pub fn h_function(
    oracle: &dyn JetOracle,
    alpha: &MultiIndex,
    zeta: &[usize],
    taus: &[usize],
    y: &[f64],
) -> Result<f64> {
    let mut it = IteratedFields::new(oracle, alpha.len())?;
    it.at(y)?;
    h_function_with(&mut it, alpha, zeta, taus)
}

/// [`h_function`] reusing an evaluator already placed at the point.
pub fn h_function_with(
    it: &mut IteratedFields<'_>,
    alpha: &MultiIndex,
    zeta: &[usize],
    taus: &[usize],
) -> Result<f64> {
    let r = check_increasing_to(taus, "taus")?;
    if r != alpha.len() {
        return Err(Error::InvalidArgument(format!(
            "taus end at {r} but the word has length {}",
            alpha.len()
        )));
    }
    if zeta.len() != taus.len() {
        return Err(Error::InvalidArgument(format!(
            "derivative word of length {} for {} blocks",
            zeta.len(),
            taus.len()
        )));
    }
    let d = it.oracle.dimension();
    if let Some(&bad) = zeta.iter().find(|&&z| z == 0 || z > d) {
        return Err(Error::InvalidArgument(format!("component {bad} outside 1..={d}")));
    }
    let mut prod = 1.0;
    let mut prev = 0;
    for (&t, &z) in taus.iter().zip(zeta) {
        let block = alpha.slice(prev + 1, t).expect("nonempty block");
        prod *= it.value(&block)?.component(z);
        prev = t;
    }
    Ok(prod)
}
