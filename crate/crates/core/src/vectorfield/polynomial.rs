//! Multivariate polynomials with exact differentiation, and polynomial
//! vector fields loaded from JSON.

use serde::{Deserialize, Serialize};

use super::oracle::JetOracle;
use crate::error::{Error, Result};

/// A polynomial on `R^d` stored as a list of (exponent vector, coefficient).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    d: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl Polynomial {
    pub fn zero(d: usize) -> Self {
        Polynomial { d, terms: Vec::new() }
    }

    pub fn new(d: usize, terms: Vec<(Vec<u32>, f64)>) -> Result<Self> {
        let mut p = Polynomial::zero(d);
        for (e, c) in terms {
            p.add_term(e, c)?;
        }
        Ok(p)
    }

    pub fn add_term(&mut self, exps: Vec<u32>, coeff: f64) -> Result<()> {
        if exps.len() != self.d {
            return Err(Error::InvalidArgument(format!(
                "monomial {exps:?} has {} exponents, expected {}",
                exps.len(),
                self.d
            )));
        }
        if !coeff.is_finite() {
            return Err(Error::InvalidArgument("non-finite polynomial coefficient".into()));
        }
        match self.terms.iter_mut().find(|(e, _)| *e == exps) {
            Some((_, c)) => *c += coeff,
            None => self.terms.push((exps, coeff)),
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[(Vec<u32>, f64)] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(e, _)| e.iter().sum::<u32>() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(y).map(|(&k, &x)| x.powi(k as i32)).product::<f64>())
            .sum()
    }

    /// `∂_ζ p(y)` for a derivative word ζ with letters in `1..=d`.
    pub fn eval_derivative(&self, zeta: &[usize], y: &[f64]) -> f64 {
        let mut need = vec![0u32; self.d];
        for &l in zeta {
            need[l - 1] += 1;
        }
        let mut total = 0.0;
        'terms: for (e, c) in &self.terms {
            let mut v = *c;
            for i in 0..self.d {
                if e[i] < need[i] {
                    continue 'terms;
                }
                // falling factorial e (e-1) ... (e-need+1)
                for q in 0..need[i] {
                    v *= (e[i] - q) as f64;
                }
                v *= y[i].powi((e[i] - need[i]) as i32);
            }
            total += v;
        }
        total
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PolynomialTerm {
    pub j: usize,
    pub i: usize,
    pub monomial: Vec<u32>,
    pub coeff: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawPolynomialField {
    d: usize,
    m: usize,
    terms: Vec<PolynomialTerm>,
}

/// A vector field whose components `V_j^i` are polynomials.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawPolynomialField", into = "RawPolynomialField")]
pub struct PolynomialField {
    d: usize,
    m: usize,
    // components[j-1][i-1]
    components: Vec<Vec<Polynomial>>,
}

impl TryFrom<RawPolynomialField> for PolynomialField {
    type Error = Error;
    fn try_from(raw: RawPolynomialField) -> Result<Self> {
        let mut f = PolynomialField::zero(raw.d, raw.m)?;
        for t in raw.terms {
            f.add_term(t.j, t.i, t.monomial, t.coeff)?;
        }
        Ok(f)
    }
}

impl From<PolynomialField> for RawPolynomialField {
    fn from(f: PolynomialField) -> Self {
        let mut terms = Vec::new();
        for (j, row) in f.components.iter().enumerate() {
            for (i, p) in row.iter().enumerate() {
                for (e, c) in p.terms() {
                    terms.push(PolynomialTerm {
                        j: j + 1,
                        i: i + 1,
                        monomial: e.clone(),
                        coeff: *c,
                    });
                }
            }
        }
        RawPolynomialField {
            d: f.d,
            m: f.m,
            terms,
        }
    }
}

impl PolynomialField {
    pub fn zero(d: usize, m: usize) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::InvalidArgument("field needs d ≥ 1 and m ≥ 1".into()));
        }
        Ok(PolynomialField {
            d,
            m,
            components: vec![vec![Polynomial::zero(d); d]; m],
        })
    }

    pub fn from_components(components: Vec<Vec<Polynomial>>) -> Result<Self> {
        let m = components.len();
        let d = components.first().map_or(0, Vec::len);
        let mut f = PolynomialField::zero(d, m)?;
        for (j, row) in components.into_iter().enumerate() {
            if row.len() != d || row.iter().any(|p| p.dim() != d) {
                return Err(Error::InvalidArgument("ragged polynomial field".into()));
            }
            f.components[j] = row;
        }
        Ok(f)
    }

    /// Add `coeff · y^monomial` to `V_j^i` (1-based `j`, `i`).
    pub fn add_term(&mut self, j: usize, i: usize, monomial: Vec<u32>, coeff: f64) -> Result<()> {
        if !(1..=self.m).contains(&j) || !(1..=self.d).contains(&i) {
            return Err(Error::InvalidArgument(format!(
                "term index (j={j}, i={i}) outside m={}, d={}",
                self.m, self.d
            )));
        }
        self.components[j - 1][i - 1].add_term(monomial, coeff)
    }

    pub fn component(&self, j: usize, i: usize) -> &Polynomial {
        &self.components[j - 1][i - 1]
    }

    pub fn degree(&self) -> usize {
        self.components
            .iter()
            .flatten()
            .map(Polynomial::degree)
            .max()
            .unwrap_or(0)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl JetOracle for PolynomialField {
    fn dimension(&self) -> usize {
        self.d
    }

    fn alphabet(&self) -> usize {
        self.m
    }

    fn max_order(&self) -> usize {
        // every derivative of a polynomial is available
        usize::MAX
    }

    fn evaluate(&self, j: usize, i: usize, zeta: &[usize], y: &[f64]) -> f64 {
        self.components[j - 1][i - 1].eval_derivative(zeta, y)
    }
}
