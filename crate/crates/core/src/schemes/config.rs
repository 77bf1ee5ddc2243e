use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::{gamma_rho, gamma_theta, next_rate_and_correction_set, rho_of, ExponentVector, IndexSet, MultiIndex};

/// A rate written either as a number or as an affine expression in `H`
/// such as `"2H-1"` or `"2H - 1/2"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateExpr {
    Value(f64),
    Expr(String),
}

impl RateExpr {
    pub fn eval(&self, h: f64) -> Result<f64> {
        match self {
            RateExpr::Value(v) => Ok(*v),
            RateExpr::Expr(s) => eval_affine(s, h),
        }
    }
}

fn parse_number(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((a, b)) => Some(a.parse::<f64>().ok()? / b.parse::<f64>().ok()?),
        None => s.parse().ok(),
    }
}

fn eval_affine(src: &str, h: f64) -> Result<f64> {
    let bad = || Error::Config(format!("cannot read rate expression {src:?}"));
    let s: String = src.replace('−', "-").chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(bad());
    }
    let mut total = 0.0;
    let mut rest = s.as_str();
    while !rest.is_empty() {
        let (sign, body) = match rest.as_bytes()[0] {
            b'-' => (-1.0, &rest[1..]),
            b'+' => (1.0, &rest[1..]),
            _ => (1.0, rest),
        };
        let end = body[1.min(body.len())..]
            .find(['+', '-'])
            .map(|i| i + 1)
            .unwrap_or(body.len());
        let term = &body[..end];
        rest = &body[end..];
        let value = match term.strip_suffix('H') {
            Some(coef) => {
                let coef = coef.strip_suffix('*').unwrap_or(coef);
                let c = if coef.is_empty() { 1.0 } else { parse_number(coef).ok_or_else(bad)? };
                c * h
            }
            None => parse_number(term).ok_or_else(bad)?,
        };
        total += sign * value;
    }
    Ok(total)
}

/// How an index set is given in a config: explicitly or through one of the
/// optimal-set constructors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SetSpec {
    Explicit(IndexSet),
    Complete { complete: usize },
    GammaRho { gamma_rho: RateExpr },
    GammaTheta {
        gamma_theta: RateExpr,
        #[serde(default = "default_delta_reg")]
        delta_reg: f64,
    },
}

pub fn default_delta_reg() -> f64 {
    0.02
}

impl SetSpec {
    /// `H` inside rate expressions is the smallest fBm exponent.
    pub fn resolve(&self, m: usize, hurst: Option<&ExponentVector>) -> Result<IndexSet> {
        let need = || {
            hurst.ok_or_else(|| Error::Config("this index set constructor needs the Hurst exponents".into()))
        };
        match self {
            SetSpec::Explicit(s) => {
                if s.m() != m {
                    return Err(Error::Config(format!("index set over {} letters, model has {m}", s.m())));
                }
                Ok(s.clone())
            }
            SetSpec::Complete { complete } => IndexSet::complete(m, *complete),
            SetSpec::GammaRho { gamma_rho: r } => {
                let h = need()?;
                gamma_rho(r.eval(fbm_min(h)?)?, h, m)
            }
            SetSpec::GammaTheta { gamma_theta: t, delta_reg } => {
                let h = need()?;
                let beta = h.to_holder(*delta_reg)?;
                gamma_theta(t.eval(fbm_min(&beta)?)?, &beta, m)
            }
        }
    }
}

fn fbm_min(h: &ExponentVector) -> Result<f64> {
    (1..=h.m())
        .filter(|&j| !(j == 1 && h.value(1) == 1.0))
        .map(|j| h.value(j))
        .reduce(f64::min)
        .ok_or_else(|| Error::Config("no fBm letters".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeKind {
    CompleteTaylor {
        order: usize,
    },
    Incomplete {
        set: SetSpec,
    },
    /// When `correction` is absent it is `Γ̂(ρ′) \ Γ̂(ρ)` for the next
    /// admissible rate ρ′ above `ρ = rho_of(set)`.
    Modified {
        set: SetSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        correction: Option<SetSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hurst: Option<ExponentVector>,
    },
    Euler,
    Milstein,
    ModifiedEuler,
}

impl SchemeKind {
    pub fn label(&self) -> String {
        match self {
            SchemeKind::CompleteTaylor { order } => format!("complete_taylor_{order}"),
            SchemeKind::Incomplete { .. } => "incomplete".into(),
            SchemeKind::Modified { .. } => "modified".into(),
            SchemeKind::Euler => "euler".into(),
            SchemeKind::Milstein => "milstein".into(),
            SchemeKind::ModifiedEuler => "modified_euler".into(),
        }
    }
}

fn default_threshold() -> f64 {
    1e8
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    #[serde(flatten)]
    pub kind: SchemeKind,
    pub coarse_n: usize,
    /// Sub-segments per coarse step; every fine sample is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine_factor: Option<usize>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub interpolate_in_step: bool,
    /// Accept non-hierarchical sets, for negative experiments.
    #[serde(default, skip_serializing_if = "is_false")]
    pub allow_non_hierarchical: bool,
    #[serde(default = "default_threshold")]
    pub divergence_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_radius: Option<f64>,
}

impl SchemeConfig {
    pub fn new(kind: SchemeKind, coarse_n: usize) -> Self {
        SchemeConfig {
            kind,
            coarse_n,
            refine_factor: None,
            interpolate_in_step: false,
            allow_non_hierarchical: false,
            divergence_threshold: default_threshold(),
            box_radius: None,
        }
    }

    pub fn with_refine(mut self, refine_factor: usize) -> Self {
        self.refine_factor = Some(refine_factor);
        self
    }

    pub fn with_kind(&self, kind: SchemeKind) -> Self {
        SchemeConfig { kind, ..self.clone() }
    }
}

/// The index set and correction words a scheme kind stands for.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedScheme {
    pub set: IndexSet,
    pub correction: Option<IndexSet>,
}

/// `{(1), …, (m)} ∪ {(j, j′) : j, j′ ≥ 2}`.
pub fn milstein_set(m: usize) -> IndexSet {
    let mut s = IndexSet::singletons(m);
    for a in 2..=m {
        for b in 2..=m {
            s.insert(MultiIndex::new(vec![a, b]).unwrap()).unwrap();
        }
    }
    s
}

/// Diagonal pairs `(j, j)` over the fBm letters.
pub fn diagonal_pairs(hurst: &ExponentVector) -> IndexSet {
    let m = hurst.m();
    let mut s = IndexSet::empty(m);
    for j in (1..=m).filter(|&j| !hurst.is_time(j)) {
        s.insert(MultiIndex::new(vec![j, j]).unwrap()).unwrap();
    }
    s
}

impl SchemeKind {
    pub fn resolve(&self, m: usize, hurst: Option<&ExponentVector>) -> Result<ResolvedScheme> {
        let plain = |set| Ok(ResolvedScheme { set, correction: None });
        match self {
            SchemeKind::CompleteTaylor { order } => {
                if *order == 0 {
                    return Err(Error::Config("Taylor order must be at least 1".into()));
                }
                plain(IndexSet::complete(m, *order)?)
            }
            SchemeKind::Incomplete { set } => plain(set.resolve(m, hurst)?),
            SchemeKind::Euler => plain(IndexSet::singletons(m)),
            SchemeKind::Milstein => plain(milstein_set(m)),
            SchemeKind::ModifiedEuler => {
                let h = hurst.ok_or_else(|| Error::Config("modified Euler needs the Hurst exponents".into()))?;
                Ok(ResolvedScheme {
                    set: IndexSet::singletons(m),
                    correction: Some(diagonal_pairs(h)),
                })
            }
            SchemeKind::Modified {
                set,
                correction,
                hurst: own,
            } => {
                let h = own
                    .as_ref()
                    .or(hurst)
                    .ok_or_else(|| Error::Config("modified scheme needs the Hurst exponents".into()))?;
                let set = set.resolve(m, Some(h))?;
                let correction = match correction {
                    Some(c) => c.resolve(m, Some(h))?,
                    None => next_rate_and_correction_set(rho_of(&set, h)?, h, m)?.1,
                };
                Ok(ResolvedScheme {
                    set,
                    correction: Some(correction),
                })
            }
        }
    }
}
