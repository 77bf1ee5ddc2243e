use std::io::Write;

use log::warn;
use serde::{Deserialize, Serialize};

use super::config::{diagonal_pairs, milstein_set, SchemeConfig, SchemeKind};
use crate::error::{Error, Result};
use crate::integrals::{closed_form, parity_vanishes, quadrature, running_signatures, StepGrid, StepIntegralTable};
use crate::integrals::MAX_QUADRATURE_LEN;
use crate::multiindex::{ExponentVector, IndexSet, MultiIndex};
use crate::signal::{DrivingSignal, SignalSpec};
use crate::vectorfield::{IteratedFields, JetOracle, Model};

/// Taylor order of the default self-convergence reference.
pub const REFERENCE_ORDER: usize = 3;

const QUADRATURE_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SolveStatus {
    Completed,
    /// The state at coarse point `step + 1` was non-finite, above the
    /// divergence threshold or outside the box; values stop at `step`.
    Diverged { step: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub signal: Option<SignalSpec>,
    pub config: SchemeConfig,
    pub refine_factor: usize,
    pub set: IndexSet,
    pub correction: Vec<MultiIndex>,
}

/// Values at times inside the coarse steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub times: Vec<f64>,
    /// `values[k]` is `y^n_{t_k}`.
    pub values: Vec<Vec<f64>>,
    pub status: SolveStatus,
    pub interpolated: Option<Trajectory>,
    pub provenance: Provenance,
}

impl SolveResult {
    pub fn diverged(&self) -> bool {
        matches!(self.status, SolveStatus::Diverged { .. })
    }

    pub fn terminal(&self) -> &[f64] {
        self.values.last().expect("values[0] = y0 always present")
    }

    pub fn coarse_n(&self) -> usize {
        self.provenance.config.coarse_n
    }

    /// Turns a flagged divergence into [`Error::Diverged`].
    pub fn into_result(self) -> Result<Self> {
        match self.status {
            SolveStatus::Diverged { step } => Err(Error::Diverged { step }),
            SolveStatus::Completed => Ok(self),
        }
    }

    fn reference_stride(&self, reference: &SolveResult) -> Result<usize> {
        let (n, r) = (self.coarse_n(), reference.coarse_n());
        if r % n != 0 || self.diverged() || reference.diverged() {
            return Err(Error::InvalidArgument(format!(
                "cannot compare a {n}-step solution with a {r}-step reference"
            )));
        }
        Ok(r / n)
    }

    /// `max_k |y^ref_{t_k} − y^n_{t_k}|` over the coarse grid, Euclidean in space.
    pub fn sup_error(&self, reference: &SolveResult) -> Result<f64> {
        let s = self.reference_stride(reference)?;
        Ok(self
            .values
            .iter()
            .enumerate()
            .map(|(k, y)| distance(y, &reference.values[k * s]))
            .fold(0.0, f64::max))
    }

    /// `|y^ref_T − y^n_T|`.
    pub fn terminal_error(&self, reference: &SolveResult) -> Result<f64> {
        self.reference_stride(reference)?;
        Ok(distance(self.terminal(), reference.terminal()))
    }

    /// CSV `t,y1,…,yd`; the in-step trajectory when present.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        let (times, values) = match &self.interpolated {
            Some(tr) => (&tr.times, &tr.values),
            None => (&self.times, &self.values),
        };
        let d = values.first().map_or(0, Vec::len);
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=d).map(|i| format!("y{i}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for (t, y) in times.iter().zip(values) {
            write!(w, "{t}")?;
            for v in y {
                write!(w, ",{v:e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// `D_γ(1)` and the homogeneity `H_γ`, so that `D_γ(s) = D_γ(1) s^{H_γ}`.
#[derive(Debug, Clone)]
struct Correction {
    word: MultiIndex,
    d1: f64,
    h_gamma: f64,
}

impl Correction {
    fn at(&self, s: f64) -> f64 {
        self.d1 * s.powf(self.h_gamma)
    }
}

fn corrections(set: &IndexSet, hurst: &ExponentVector) -> Result<Vec<Correction>> {
    let mut out = Vec::new();
    for word in set.iter() {
        if parity_vanishes(word, hurst) {
            warn!("correction word {word} has an odd fBm letter count; its mean vanishes");
            continue;
        }
        let d1 = match closed_form(word, hurst, 1.0) {
            Ok(v) => v,
            Err(_) if word.len() <= MAX_QUADRATURE_LEN => quadrature(word, hurst, QUADRATURE_NODES, 1.0)?,
            Err(_) => {
                return Err(Error::Config(format!(
                    "D_{word} needs quadrature of order {} beyond the supported {MAX_QUADRATURE_LEN}",
                    word.len()
                )))
            }
        };
        out.push(Correction {
            word: word.clone(),
            d1,
            h_gamma: hurst.weight(word),
        });
    }
    Ok(out)
}

fn is_time_path(signal: &DrivingSignal) -> bool {
    match signal.spec() {
        Some(s) => s.component_1_is_time,
        None => {
            let c = signal.component(1);
            (0..=signal.n_fine()).all(|k| (c[k] - signal.time(k)).abs() <= 1e-12 * signal.horizon().max(1.0))
        }
    }
}

fn grid_for(signal: &DrivingSignal, config: &SchemeConfig) -> Result<StepGrid> {
    let n_fine = signal.n_fine();
    if config.coarse_n == 0 || n_fine % config.coarse_n != 0 {
        return Err(Error::Config(format!(
            "coarse_n = {} must divide the fine grid size {n_fine}",
            config.coarse_n
        )));
    }
    match config.refine_factor {
        Some(r) => StepGrid::new(n_fine, config.coarse_n, r).map_err(|e| Error::Config(e.to_string())),
        None => StepGrid::full(n_fine, config.coarse_n),
    }
}

fn check_state(y: &[f64], config: &SchemeConfig) -> bool {
    let finite = y.iter().all(|v| v.is_finite());
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let in_box = config.box_radius.map_or(true, |r| y.iter().all(|v| v.abs() <= r));
    finite && norm <= config.divergence_threshold && in_box
}

fn run(
    oracle: &dyn JetOracle,
    set: &IndexSet,
    correction: &[Correction],
    signal: &DrivingSignal,
    y0: &[f64],
    config: &SchemeConfig,
) -> Result<SolveResult> {
    let d = oracle.dimension();
    let m = oracle.alphabet();
    if signal.m() != m {
        return Err(Error::Config(format!("signal has {} components, field has {m} letters", signal.m())));
    }
    if y0.len() != d {
        return Err(Error::Config(format!("y0 has {} entries, state dimension is {d}", y0.len())));
    }
    if set.is_empty() {
        return Err(Error::Config("empty index set".into()));
    }
    if set.m() != m {
        return Err(Error::Config(format!("index set over {} letters, field has {m}", set.m())));
    }
    if !config.allow_non_hierarchical {
        if let Some((w, missing)) = set.first_hierarchy_violation() {
            return Err(Error::Config(format!(
                "index set is not hierarchical: {w} is a member but {missing} is not"
            )));
        }
    }
    let grid = grid_for(signal, config)?;
    let words: Vec<MultiIndex> = set.iter().cloned().collect();
    let table = StepIntegralTable::build(signal, &grid, &words)?;
    let max_len = set.max_len().max(correction.iter().map(|c| c.word.len()).max().unwrap_or(0));
    let mut fields = IteratedFields::new(oracle, max_len)?;

    let n = config.coarse_n;
    let dt = signal.horizon() / n as f64;
    let step_corrections: Vec<f64> = correction.iter().map(|c| c.at(dt)).collect();
    let mut values = Vec::with_capacity(n + 1);
    values.push(y0.to_vec());
    let mut interp = config.interpolate_in_step.then(|| Trajectory {
        times: Vec::new(),
        values: Vec::new(),
    });
    let mut status = SolveStatus::Completed;
    let mut y = y0.to_vec();

    for k in 0..n {
        fields.at(&y)?;
        let mut v_words = Vec::with_capacity(words.len());
        for w in &words {
            v_words.push(fields.value(w)?);
        }
        let mut v_corr = Vec::with_capacity(correction.len());
        for c in correction {
            v_corr.push(fields.value(&c.word)?);
        }

        if let Some(tr) = interp.as_mut() {
            let sigs = running_signatures(signal, &grid, k, set.max_len())?;
            let h_sub = dt / grid.refine_factor as f64;
            for (i, sig) in sigs.iter().enumerate().take(grid.refine_factor) {
                let s = i as f64 * h_sub;
                let mut z = y.clone();
                for (w, v) in words.iter().zip(&v_words) {
                    let x = sig.get(w);
                    for (zi, vi) in z.iter_mut().zip(v.components()) {
                        *zi += vi * x;
                    }
                }
                for (c, v) in correction.iter().zip(&v_corr) {
                    let dc = c.at(s);
                    for (zi, vi) in z.iter_mut().zip(v.components()) {
                        *zi += vi * dc;
                    }
                }
                tr.times.push(k as f64 * dt + s);
                tr.values.push(z);
            }
        }

        let row = table.row(k);
        let mut next = y.clone();
        for (x, v) in row.iter().zip(&v_words) {
            for (ni, vi) in next.iter_mut().zip(v.components()) {
                *ni += vi * x;
            }
        }
        for (dc, v) in step_corrections.iter().zip(&v_corr) {
            for (ni, vi) in next.iter_mut().zip(v.components()) {
                *ni += vi * dc;
            }
        }
        if !check_state(&next, config) {
            status = SolveStatus::Diverged { step: k };
            break;
        }
        values.push(next.clone());
        y = next;
    }

    if let Some(tr) = interp.as_mut() {
        if status == SolveStatus::Completed {
            tr.times.push(signal.horizon());
            tr.values.push(y.clone());
        }
    }
    let times = (0..values.len()).map(|k| k as f64 * dt).collect();
    Ok(SolveResult {
        times,
        values,
        status,
        interpolated: interp,
        provenance: Provenance {
            signal: signal.spec().cloned(),
            config: config.clone(),
            refine_factor: grid.refine_factor,
            set: set.clone(),
            correction: correction.iter().map(|c| c.word.clone()).collect(),
        },
    })
}

/// Incomplete Taylor scheme over `set`.
pub fn solve_incomplete(
    oracle: &dyn JetOracle,
    set: &IndexSet,
    signal: &DrivingSignal,
    y0: &[f64],
    config: &SchemeConfig,
) -> Result<SolveResult> {
    run(oracle, set, &[], signal, y0, config)
}

/// Incomplete scheme over `set_rho` plus the mean corrections
/// `Σ_{γ∈correction} 𝒱_γ I(y) D_γ(t − t_k)`.
pub fn solve_modified(
    oracle: &dyn JetOracle,
    set_rho: &IndexSet,
    correction_set: &IndexSet,
    hurst: &ExponentVector,
    signal: &DrivingSignal,
    y0: &[f64],
    config: &SchemeConfig,
) -> Result<SolveResult> {
    if hurst.m() != oracle.alphabet() {
        return Err(Error::Config(format!(
            "{} Hurst exponents for {} letters",
            hurst.m(),
            oracle.alphabet()
        )));
    }
    let corr = corrections(correction_set, hurst)?;
    run(oracle, set_rho, &corr, signal, y0, config)
}

fn signal_hurst(signal: &DrivingSignal) -> Option<&ExponentVector> {
    signal.spec().map(|s| &s.hurst)
}

/// Euler, Milstein and modified Euler through the general solvers.
pub fn solve_named(
    kind: &SchemeKind,
    oracle: &dyn JetOracle,
    signal: &DrivingSignal,
    y0: &[f64],
    config: &SchemeConfig,
) -> Result<SolveResult> {
    let m = oracle.alphabet();
    match kind {
        SchemeKind::Euler => solve_incomplete(oracle, &IndexSet::singletons(m), signal, y0, config),
        SchemeKind::Milstein => {
            if !is_time_path(signal) {
                return Err(Error::Config("Milstein needs component 1 to be the time path".into()));
            }
            solve_incomplete(oracle, &milstein_set(m), signal, y0, config)
        }
        SchemeKind::ModifiedEuler => {
            let h = signal_hurst(signal)
                .ok_or_else(|| Error::Config("modified Euler needs a signal with recorded Hurst exponents".into()))?;
            solve_modified(oracle, &IndexSet::singletons(m), &diagonal_pairs(h), h, signal, y0, config)
        }
        other => Err(Error::Config(format!("{} is not a named scheme", other.label()))),
    }
}

/// Runs `config.kind`.
pub fn solve(oracle: &dyn JetOracle, signal: &DrivingSignal, y0: &[f64], config: &SchemeConfig) -> Result<SolveResult> {
    match &config.kind {
        k @ (SchemeKind::Euler | SchemeKind::Milstein | SchemeKind::ModifiedEuler) => {
            solve_named(k, oracle, signal, y0, config)
        }
        SchemeKind::Modified { hurst, .. } => {
            let h = hurst
                .as_ref()
                .or(signal_hurst(signal))
                .ok_or_else(|| Error::Config("modified scheme needs the Hurst exponents".into()))?;
            let r = config.kind.resolve(oracle.alphabet(), Some(h))?;
            let corr = r.correction.unwrap_or_else(|| IndexSet::empty(oracle.alphabet()));
            solve_modified(oracle, &r.set, &corr, h, signal, y0, config)
        }
        kind => {
            let r = kind.resolve(oracle.alphabet(), signal_hurst(signal))?;
            solve_incomplete(oracle, &r.set, signal, y0, config)
        }
    }
}

/// [`solve`] with the model's initial value and box.
pub fn solve_model(model: &Model, signal: &DrivingSignal, config: &SchemeConfig) -> Result<SolveResult> {
    let mut config = config.clone();
    if config.box_radius.is_none() {
        config.box_radius = model.box_radius;
    }
    solve(model.field.as_ref(), signal, &model.y0, &config)
}

/// Complete Taylor scheme of order [`REFERENCE_ORDER`] on `ref_n` steps,
/// using every fine sample.
pub fn reference_solution(oracle: &dyn JetOracle, signal: &DrivingSignal, y0: &[f64], ref_n: usize) -> Result<SolveResult> {
    reference_solution_with_order(oracle, signal, y0, ref_n, REFERENCE_ORDER)
}

pub fn reference_solution_with_order(
    oracle: &dyn JetOracle,
    signal: &DrivingSignal,
    y0: &[f64],
    ref_n: usize,
    order: usize,
) -> Result<SolveResult> {
    let config = SchemeConfig::new(SchemeKind::CompleteTaylor { order }, ref_n);
    let set = IndexSet::complete(oracle.alphabet(), order)?;
    solve_incomplete(oracle, &set, signal, y0, &config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorfield::{linear_scalar, PolynomialField};

    fn time_signal(n: usize, t: f64) -> DrivingSignal {
        DrivingSignal::from_fn(1, n, t, |_, s| s).unwrap()
    }

    #[test]
    fn linear_time_driven_taylor_step() {
        let model = linear_scalar(0.8, 1.0);
        let sig = time_signal(1, 0.5);
        for order in 1..=4 {
            let cfg = SchemeConfig::new(SchemeKind::CompleteTaylor { order }, 1);
            let r = solve_model(&model, &sig, &cfg).unwrap();
            let x: f64 = 0.8 * 0.5;
            let want: f64 = (0..=order).map(|k| x.powi(k as i32) / (1..=k).product::<usize>() as f64).sum();
            assert!((r.terminal()[0] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn reference_matches_exponential() {
        let model = linear_scalar(1.3, 0.7);
        let sig = time_signal(1 << 14, 1.0);
        let r = reference_solution(model.field.as_ref(), &sig, &model.y0, 1 << 14).unwrap();
        assert!((r.terminal()[0] - 0.7 * 1.3f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn divergence_is_flagged() {
        let model = linear_scalar(1e3, 1.0);
        let sig = time_signal(64, 1.0);
        let cfg = SchemeConfig::new(SchemeKind::Euler, 4);
        let r = solve_model(&model, &sig, &cfg).unwrap();
        assert!(r.diverged());
        assert_eq!(r.values[0], vec![1.0]);
        assert!(r.values.len() < 5);
        assert!(matches!(r.into_result(), Err(Error::Diverged { .. })));
    }

    #[test]
    fn rejects_non_hierarchical() {
        let f = PolynomialField::zero(1, 2).unwrap();
        let set = IndexSet::new(2, vec![MultiIndex::new(vec![1, 2]).unwrap(), MultiIndex::single(1)]).unwrap();
        let sig = DrivingSignal::from_fn(2, 8, 1.0, |_, t| t).unwrap();
        let mut cfg = SchemeConfig::new(SchemeKind::Incomplete { set: super::super::SetSpec::Explicit(set.clone()) }, 2);
        assert!(matches!(solve_incomplete(&f, &set, &sig, &[0.0], &cfg), Err(Error::Config(_))));
        cfg.allow_non_hierarchical = true;
        assert!(solve_incomplete(&f, &set, &sig, &[0.0], &cfg).is_ok());
    }
}
