use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::{ExponentVector, MultiIndex};
use crate::schemes::SchemeKind;
use crate::signal::SignalSpec;
use crate::vectorfield::ModelSpec;

use super::fit::MIN_POINTS;

/// Paths required before an L_p claim is made.
pub const MIN_LP_PATHS: usize = 30;

/// Sub-segments per coarse step as a function of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RefineRule {
    /// Every fine sample.
    #[default]
    Full,
    Fixed { factor: usize },
    /// `factor · n`, capped by the fine steps available per coarse step.
    Proportional { factor: f64 },
}

impl RefineRule {
    /// `None` means every fine sample.
    pub fn refine_for(&self, n: usize, n_fine: usize) -> Option<usize> {
        let stride = n_fine / n;
        match *self {
            RefineRule::Full => None,
            RefineRule::Fixed { factor } => Some(factor),
            RefineRule::Proportional { factor } => {
                // largest power of two not above factor·n that divides the stride
                let want = (factor * n as f64).max(1.0) as usize;
                let mut r = 1;
                while r * 2 <= want && stride % (r * 2) == 0 {
                    r *= 2;
                }
                Some(r)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Experiment {
    /// Pathwise sup error, median per-path slope against −θ.
    #[serde(rename = "as")]
    AlmostSure {
        scheme: SchemeKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    /// Terminal L_p error against −ρ (σ_n-adjusted for modified schemes).
    Lp {
        scheme: SchemeKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    Nu {
        alpha: MultiIndex,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    Omega {
        alpha: MultiIndex,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
}

impl Experiment {
    pub fn tag(&self) -> &'static str {
        match self {
            Experiment::AlmostSure { .. } => "as",
            Experiment::Lp { .. } => "lp",
            Experiment::Nu { .. } => "nu",
            Experiment::Omega { .. } => "omega",
        }
    }

    pub fn label(&self) -> String {
        match self {
            Experiment::AlmostSure { scheme, .. } | Experiment::Lp { scheme, .. } => scheme.label(),
            Experiment::Nu { alpha, .. } | Experiment::Omega { alpha, .. } => alpha.dotted(),
        }
    }

    fn needs_model(&self) -> bool {
        matches!(self, Experiment::AlmostSure { .. } | Experiment::Lp { .. })
    }
}

fn default_horizon() -> f64 {
    1.0
}
fn default_p() -> f64 {
    2.0
}
fn default_reference_order() -> usize {
    3
}
fn default_delta_reg() -> f64 {
    0.02
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    /// Hurst exponents per letter; a leading 1 makes letter 1 the time path.
    pub hurst: Vec<f64>,
    #[serde(rename = "T", default = "default_horizon")]
    pub horizon: f64,
    pub n_fine: usize,
    pub n_values: Vec<usize>,
    pub paths: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    pub seed: u64,
    #[serde(default)]
    pub refine: RefineRule,
    /// Steps of the self-convergence reference; `n_fine` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_n: Option<usize>,
    #[serde(default = "default_reference_order")]
    pub reference_order: usize,
    #[serde(default = "default_delta_reg")]
    pub delta_reg: f64,
    /// Repeat error measurements against an order−1 and a half-size reference.
    #[serde(default = "default_true")]
    pub reference_sensitivity: bool,
    pub experiments: Vec<Experiment>,
}

impl ExperimentPlan {
    pub fn hurst_vector(&self) -> Result<ExponentVector> {
        ExponentVector::hurst(self.hurst.clone()).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn signal_spec(&self) -> Result<SignalSpec> {
        let h = self.hurst_vector()?;
        let time = h.has_time_letter();
        SignalSpec::new(h, self.horizon, self.n_fine, self.seed, time).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn ref_n(&self) -> usize {
        self.ref_n.unwrap_or(self.n_fine)
    }

    /// Ladder points usable on this fine grid.
    pub fn usable_n(&self) -> Vec<usize> {
        self.n_values
            .iter()
            .copied()
            .filter(|&n| n > 1 && self.n_fine % n == 0)
            .collect()
    }

    /// Configuration problems give [`Error::Config`]; plans that are well
    /// formed but cannot support a rate claim give
    /// [`Error::InsufficientLadder`] or [`Error::Infeasible`].
    pub fn validate(&self) -> Result<()> {
        self.signal_spec()?;
        if self.experiments.is_empty() {
            return Err(Error::Config("plan lists no experiments".into()));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_values must be strictly increasing".into()));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::Config(format!("moment order p = {} must be at least 1", self.p)));
        }
        if self.reference_order == 0 {
            return Err(Error::Config("reference order must be at least 1".into()));
        }
        let usable = self.usable_n();
        if usable.len() < MIN_POINTS {
            return Err(Error::InsufficientLadder {
                usable: usable.len(),
                required: MIN_POINTS,
            });
        }
        if self.experiments.iter().any(Experiment::needs_model) {
            if self.model.is_none() {
                return Err(Error::Config("rate experiments on schemes need a model".into()));
            }
            let ref_n = self.ref_n();
            let top = *usable.last().unwrap();
            if self.n_fine % ref_n != 0 || ref_n < 8 * top {
                return Err(Error::Config(format!(
                    "reference with {ref_n} steps must divide n_fine = {} and be at least 8 × {top}",
                    self.n_fine
                )));
            }
        }
        let min_paths = if self.experiments.iter().any(|e| !matches!(e, Experiment::AlmostSure { .. })) {
            MIN_LP_PATHS
        } else {
            1
        };
        if self.paths < min_paths {
            return Err(Error::Infeasible(format!(
                "{} paths; moment-based rates need at least {min_paths}",
                self.paths
            )));
        }
        Ok(())
    }
}

pub const BUILTIN_PLANS: &[&str] = &["euler_h07", "modified_euler_h07"];

fn scalar_lp_plan(name: &str, scheme: SchemeKind) -> ExperimentPlan {
    ExperimentPlan {
        name: name.into(),
        model: Some(ModelSpec::builtin("sin_scalar")),
        hurst: vec![0.7],
        horizon: 1.0,
        n_fine: 1 << 14,
        n_values: (6..=11).map(|e| 1 << e).collect(),
        paths: 200,
        p: 2.0,
        seed: 20_240_601,
        refine: RefineRule::Full,
        ref_n: Some(1 << 14),
        reference_order: 3,
        delta_reg: 0.02,
        reference_sensitivity: true,
        experiments: vec![Experiment::Lp { scheme, tolerance: None }],
    }
}

/// Named plans shipped with the harness.
pub fn builtin_plan(name: &str) -> Result<ExperimentPlan> {
    match name {
        "euler_h07" => Ok(scalar_lp_plan(name, SchemeKind::Euler)),
        "modified_euler_h07" => Ok(scalar_lp_plan(name, SchemeKind::ModifiedEuler)),
        other => Err(Error::Config(format!("unknown plan {other:?}; built-ins are {BUILTIN_PLANS:?}"))),
    }
}
