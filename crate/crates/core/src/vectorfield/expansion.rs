//! Numerical checks of the generalized Leibniz rule and of the expansion of
//! `𝒱_α f` into H-functions, evaluated exactly on polynomial data via jets.

use std::sync::Arc;

use itertools::Itertools;

use super::iterated::{FieldJets, IteratedFields};
use super::jet::{Jet, JetBasis};
use super::oracle::JetOracle;
use super::polynomial::Polynomial;
use crate::error::{Error, Result};
use crate::multiindex::{check_increasing_to, increasing_sequences, xi_set, xi_with_constraints, MultiIndex};

fn poly_jet(basis: &JetBasis, order: usize, p: &Polynomial, y: &[f64]) -> Jet {
    basis.jet_from(order, |z| p.eval_derivative(z, y))
}

// letters of alpha strictly between 1-based positions a and b
fn inner(alpha: &[usize], a: usize, b: usize) -> &[usize] {
    &alpha[a..b - 1]
}

/// Max over `points` of the absolute difference between the nested left side
/// `𝒱_{α_{0,l_1}}(f¹_{α(l_1)} ⋯ 𝒱_{α_{l_{p−1},l_p}} f^p_{α(l_p)})` and the
/// double sum over τ⃗ and ρ ∈ Ξ_r(l⃗; τ⃗) of products
/// `Π_i 𝒱_{(α∘ρ)_{τ_{i−1},τ_i}} f^i_{(α∘ρ)(τ_i)}`.
///
/// `test_functions[i][j - 1]` is `f^{i+1}_j`.
pub fn leibniz_check(
    oracle: &dyn JetOracle,
    alpha: &MultiIndex,
    ls: &[usize],
    test_functions: &[Vec<Polynomial>],
    points: &[Vec<f64>],
) -> Result<f64> {
    let r = check_increasing_to(ls, "ls")?;
    let p = ls.len();
    if r != alpha.len() {
        return Err(Error::InvalidArgument(format!("ls end at {r}, word length {}", alpha.len())));
    }
    let m = oracle.alphabet();
    alpha.check_alphabet(m)?;
    if test_functions.len() != p || test_functions.iter().any(|row| row.len() != m) {
        return Err(Error::InvalidArgument(format!("need {p} rows of {m} test functions")));
    }
    let order = r - p;
    let basis = Arc::new(JetBasis::new(oracle.dimension(), order));
    let a = alpha.letters();

    let mut rhs_terms = Vec::new();
    for taus in increasing_sequences(r).into_iter().filter(|t| t.len() == p) {
        for rho in xi_with_constraints(ls, &taus)? {
            rhs_terms.push((taus.clone(), rho.permute_word(alpha)));
        }
    }

    let mut worst: f64 = 0.0;
    for y in points {
        let v = FieldJets::new(oracle, basis.clone(), y)?;
        let f: Vec<Vec<Jet>> = test_functions
            .iter()
            .map(|row| row.iter().map(|q| poly_jet(&basis, order, q, y)).collect())
            .collect();

        let start = |i: usize| if i == 0 { 0 } else { ls[i - 1] };
        let mut g = v.apply_word(inner(a, start(p - 1), ls[p - 1]), &f[p - 1][a[ls[p - 1] - 1] - 1]);
        for i in (0..p - 1).rev() {
            g = basis.mul(&f[i][a[ls[i] - 1] - 1], &g);
            g = v.apply_word(inner(a, start(i), ls[i]), &g);
        }
        let lhs = g.value();

        let mut rhs = 0.0;
        for (taus, beta) in &rhs_terms {
            let b = beta.letters();
            let mut prod = 1.0;
            let mut prev = 0;
            for (i, &t) in taus.iter().enumerate() {
                prod *= v.apply_word(inner(b, prev, t), &f[i][b[t - 1] - 1]).value();
                prev = t;
            }
            rhs += prod;
        }
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Max over `points` of `|𝒱_α f − Σ_p Σ_ζ Σ_τ⃗ Σ_{ρ∈Ξ_r(τ⃗)} H(α∘ρ, ζ, τ⃗) ∂_ζ f|`.
pub fn lemma_expansion_check(
    oracle: &dyn JetOracle,
    alpha: &MultiIndex,
    f: &Polynomial,
    points: &[Vec<f64>],
) -> Result<f64> {
    let r = alpha.len();
    let d = oracle.dimension();
    alpha.check_alphabet(oracle.alphabet())?;
    if f.dim() != d {
        return Err(Error::InvalidArgument(format!("test function on R^{}, field on R^{d}", f.dim())));
    }
    let basis = Arc::new(JetBasis::new(d, r));
    let mut terms = Vec::new();
    for taus in increasing_sequences(r) {
        for rho in xi_set(&taus)? {
            terms.push((taus.clone(), rho.permute_word(alpha)));
        }
    }

    let mut worst: f64 = 0.0;
    let mut it = IteratedFields::new(oracle, r)?;
    for y in points {
        let v = FieldJets::new(oracle, basis.clone(), y)?;
        let lhs = v.apply_word(alpha.letters(), &poly_jet(&basis, r, f, y)).value();

        it.at(y)?;
        let mut rhs = 0.0;
        for (taus, beta) in &terms {
            let mut blocks = Vec::with_capacity(taus.len());
            let mut prev = 0;
            for &t in taus {
                blocks.push(it.value(&beta.slice(prev + 1, t).expect("nonempty block"))?);
                prev = t;
            }
            for zeta in (0..taus.len()).map(|_| 1..=d).multi_cartesian_product() {
                let h: f64 = blocks.iter().zip(&zeta).map(|(b, &z)| b.component(z)).product();
                if h != 0.0 {
                    rhs += h * f.eval_derivative(&zeta, y);
                }
            }
        }
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}
