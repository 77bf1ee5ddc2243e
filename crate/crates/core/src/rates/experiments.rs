use log::{info, warn};
use rayon::prelude::*;

use super::fit::{fit_power_law, mean_and_se, pairwise_sum, quantile, PowerFit};
use super::plan::{Experiment, ExperimentPlan};
use super::report::{RateReport, RateRow, ReferenceCheck, Verdict};
use crate::error::{Error, Result};
use crate::integrals::{d_gamma_default, StepGrid, StepIntegralTable};
use crate::multiindex::{rho_of, theta_of, ExponentVector, MultiIndex};
use crate::schemes::{solve_model, SchemeConfig, SchemeKind, SolveResult};
use crate::signal::{DrivingSignal, SignalGenerator};
use crate::vectorfield::Model;

/// Errors below this are treated as exact (constant fields and similar).
const NOISE_FLOOR: f64 = 1e-13;

const THREE_QUARTERS: f64 = 0.75;

fn is_three_quarters(h: f64) -> bool {
    (h - THREE_QUARTERS).abs() < 1e-12
}

/// σ_n exponent gained by modified schemes, and whether a `log n` factor
/// accompanies it.
pub fn sigma_exponent(h_max: f64) -> (f64, bool) {
    if is_three_quarters(h_max) {
        (0.5, true)
    } else if h_max < THREE_QUARTERS {
        (0.5, false)
    } else {
        (2.0 - 2.0 * h_max, false)
    }
}

/// Theoretical slope of the L₂ norm of the step-simplex sum of `alpha`.
pub fn nu_theory(alpha: &MultiIndex, h: &ExponentVector) -> f64 {
    let noise: Vec<usize> = alpha.letters().iter().copied().filter(|&j| !h.is_time(j)).collect();
    let h_alpha = h.weight(alpha);
    if noise.len() % 2 == 0 {
        1.0 - h_alpha
    } else {
        let h_top = noise.iter().map(|&j| h.value(j)).fold(f64::MIN, f64::max);
        h_top - h_alpha
    }
}

/// Theoretical slope of the centered sum, and whether `√log n` is regressed out.
pub fn omega_theory(alpha: &MultiIndex, h: &ExponentVector) -> (f64, bool) {
    let h_alpha = h.weight(alpha);
    let h_top = alpha
        .letters()
        .iter()
        .filter(|&&j| !h.is_time(j))
        .map(|&j| h.value(j))
        .fold(0.5, f64::max);
    if is_three_quarters(h_top) {
        (0.5 - h_alpha, true)
    } else if h_top < THREE_QUARTERS {
        (0.5 - h_alpha, false)
    } else {
        (2.0 * h_top - 1.0 - h_alpha, false)
    }
}

fn verdict(slope: f64, theory: f64, tol: f64) -> Verdict {
    if (slope - theory).abs() <= tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

struct ReferenceVariant {
    label: String,
    order: usize,
    ref_n: usize,
}

fn reference_variants(plan: &ExperimentPlan) -> Vec<ReferenceVariant> {
    let (order, ref_n) = (plan.reference_order, plan.ref_n());
    let mut out = vec![ReferenceVariant {
        label: format!("order {order}, {ref_n} steps"),
        order,
        ref_n,
    }];
    if !plan.reference_sensitivity {
        return out;
    }
    if order >= 2 {
        out.push(ReferenceVariant {
            label: format!("order {}, {ref_n} steps", order - 1),
            order: order - 1,
            ref_n,
        });
    }
    let top = *plan.usable_n().last().unwrap();
    let half = ref_n / 2;
    if half >= 2 * top && half % top == 0 {
        out.push(ReferenceVariant {
            label: format!("order {order}, {half} steps"),
            order,
            ref_n: half,
        });
    }
    out
}

/// `errors[v][i]` = (sup error, terminal error) against reference variant
/// `v` at ladder point `i`, `None` when the scheme or reference diverged.
type PathErrors = Vec<Vec<Option<(f64, f64)>>>;

fn scheme_errors(
    plan: &ExperimentPlan,
    model: &Model,
    scheme: &SchemeKind,
    variants: &[ReferenceVariant],
) -> Result<Vec<PathErrors>> {
    let spec = plan.signal_spec()?;
    let gen = SignalGenerator::new(&spec)?;
    let ns = plan.usable_n();
    (0..plan.paths as u64)
        .into_par_iter()
        .map(|p| -> Result<PathErrors> {
            let sig = gen.generate(p);
            let refs: Vec<Option<SolveResult>> = variants
                .iter()
                .map(|v| {
                    let cfg = SchemeConfig::new(SchemeKind::CompleteTaylor { order: v.order }, v.ref_n);
                    solve_model(model, &sig, &cfg).map(|r| (!r.diverged()).then_some(r))
                })
                .collect::<Result<_>>()?;
            let mut out = vec![vec![None; ns.len()]; variants.len()];
            for (i, &n) in ns.iter().enumerate() {
                let mut cfg = SchemeConfig::new(scheme.clone(), n);
                cfg.refine_factor = plan.refine.refine_for(n, plan.n_fine);
                let r = solve_model(model, &sig, &cfg)?;
                if r.diverged() {
                    continue;
                }
                for (v, reference) in refs.iter().enumerate() {
                    if let Some(reference) = reference {
                        out[v][i] = Some((r.sup_error(reference)?, r.terminal_error(reference)?));
                    }
                }
            }
            Ok(out)
        })
        .collect()
}

fn default_tolerance(max_len: usize) -> f64 {
    if max_len <= 1 {
        0.1
    } else {
        0.15
    }
}

fn lp_rows(ns: &[usize], per_path: &[&PathErrors], v: usize, p: f64) -> (Vec<RateRow>, Vec<f64>, Vec<f64>) {
    let mut rows = Vec::new();
    let mut errs = Vec::new();
    let mut log_se = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let e: Vec<f64> = per_path.iter().filter_map(|pe| pe[v][i].map(|x| x.1)).collect();
        let powered: Vec<f64> = e.iter().map(|x| x.powf(p)).collect();
        let (m, se) = mean_and_se(&powered);
        let value = m.powf(1.0 / p);
        let s = sorted(e.clone());
        rows.push(RateRow {
            n,
            value,
            std_error: Some(value * se / (p * m)).filter(|x| x.is_finite()),
            q25: quantile(&s, 0.25),
            median: quantile(&s, 0.5),
            q75: quantile(&s, 0.75),
            paths_used: e.len(),
            excluded: per_path.len() - e.len(),
        });
        errs.push(value);
        log_se.push(se / (p * m));
    }
    (rows, errs, log_se)
}

fn floor_report(report: &mut RateReport, errs: &[f64]) -> bool {
    if errs.iter().all(|e| *e < NOISE_FLOOR) {
        report.verdict = Verdict::Skipped;
        report.note = Some("errors at the reference noise floor; slope test skipped".into());
        return true;
    }
    false
}

fn resolve(plan: &ExperimentPlan, scheme: &SchemeKind) -> Result<(Model, ExponentVector, crate::schemes::ResolvedScheme)> {
    let model = plan
        .model
        .as_ref()
        .ok_or_else(|| Error::Config("rate experiments on schemes need a model".into()))?
        .build()?;
    let h = plan.hurst_vector()?;
    if model.alphabet() != h.m() {
        return Err(Error::Config(format!(
            "model has {} letters but {} Hurst exponents are given",
            model.alphabet(),
            h.m()
        )));
    }
    let resolved = scheme.resolve(h.m(), Some(&h))?;
    Ok((model, h, resolved))
}

/// Terminal L_p error against the self-convergence reference.
pub fn lp_rate_experiment(plan: &ExperimentPlan, scheme: &SchemeKind, tolerance: Option<f64>) -> Result<RateReport> {
    let (model, h, resolved) = resolve(plan, scheme)?;
    let rho = rho_of(&resolved.set, &h)?;
    let h_max = h.max_noise().unwrap_or(0.5);
    let (adj, log_factor) = match &resolved.correction {
        Some(_) => sigma_exponent(h_max),
        None => (0.0, false),
    };
    let theory = -(rho + adj);
    let variants = reference_variants(plan);
    let per_path = scheme_errors(plan, &model, scheme, &variants)?;
    let refs: Vec<&PathErrors> = per_path.iter().collect();
    let ns = plan.usable_n();
    let nsf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();

    let (rows, errs, log_se) = lp_rows(&ns, &refs, 0, plan.p);
    let tol = tolerance.unwrap_or(default_tolerance(resolved.set.max_len()));
    let mut report = RateReport::new(plan, "lp", scheme.label(), theory, tol, rows);
    report.theory_detail = if adj > 0.0 {
        format!("rho = {rho}, sigma_n exponent {adj}{}", if log_factor { " with log factor" } else { "" })
    } else {
        format!("rho = {rho}")
    };
    report.excluded_paths = per_path.iter().filter(|pe| pe[0].iter().any(Option::is_none)).count();
    if floor_report(&mut report, &errs) {
        return Ok(report);
    }
    let fit = fit_power_law(&nsf, &errs, Some(&log_se), log_factor)?;
    report.apply_fit(&fit);
    for (v, var) in variants.iter().enumerate().skip(1) {
        let (_, e, s) = lp_rows(&ns, &refs, v, plan.p);
        if let Ok(f) = fit_power_law(&nsf, &e, Some(&s), log_factor) {
            report.reference.push(ReferenceCheck {
                reference: var.label.clone(),
                slope: f.slope,
                shift: f.slope - fit.slope,
            });
        }
    }
    info!("{}: slope {:.3} ± {:.3}, theory {:.3}", report.name, report.slope, report.ci, theory);
    Ok(report)
}

fn as_slopes(ns: &[f64], per_path: &[PathErrors], v: usize) -> Vec<f64> {
    per_path
        .iter()
        .filter_map(|pe| {
            let e: Option<Vec<f64>> = pe[v].iter().map(|x| x.map(|x| x.0)).collect();
            let e = e?;
            fit_power_law(ns, &e, None, false).ok().map(|f| f.slope)
        })
        .collect()
}

/// Pathwise sup error; the reported slope is the median of per-path slopes.
pub fn as_rate_experiment(plan: &ExperimentPlan, scheme: &SchemeKind, tolerance: Option<f64>) -> Result<RateReport> {
    let (model, h, resolved) = resolve(plan, scheme)?;
    let beta = h.to_holder(plan.delta_reg)?;
    let theta = theta_of(&resolved.set, &beta)?;
    let variants = reference_variants(plan);
    let per_path = scheme_errors(plan, &model, scheme, &variants)?;
    let ns = plan.usable_n();
    let nsf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();

    let mut rows = Vec::new();
    let mut medians = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let e = sorted(per_path.iter().filter_map(|pe| pe[0][i].map(|x| x.0)).collect());
        let row = RateRow {
            n,
            value: quantile(&e, 0.5),
            std_error: None,
            q25: quantile(&e, 0.25),
            median: quantile(&e, 0.5),
            q75: quantile(&e, 0.75),
            paths_used: e.len(),
            excluded: per_path.len() - e.len(),
        };
        medians.push(row.median);
        rows.push(row);
    }
    let tol = tolerance.unwrap_or(default_tolerance(resolved.set.max_len()));
    let mut report = RateReport::new(plan, "as", scheme.label(), -theta, tol, rows);
    report.theory_detail = format!("theta = {theta} with beta = H - {}", plan.delta_reg);
    report.excluded_paths = per_path.iter().filter(|pe| pe[0].iter().any(Option::is_none)).count();
    if floor_report(&mut report, &medians) {
        return Ok(report);
    }
    let slopes = sorted(as_slopes(&nsf, &per_path, 0));
    if slopes.is_empty() {
        return Err(Error::Infeasible("no path completed every ladder point".into()));
    }
    let (q25, med, q75) = (quantile(&slopes, 0.25), quantile(&slopes, 0.5), quantile(&slopes, 0.75));
    let pooled = fit_power_law(&nsf, &medians, None, false)?;
    report.slope = med;
    report.intercept = pooled.intercept;
    report.ci = 1.58 * (q75 - q25) / (slopes.len() as f64).sqrt();
    report.slope_quantiles = Some([q25, med, q75]);
    report.pooled_slope = Some(pooled.slope);
    report.verdict = verdict(med, report.theory, tol);
    for (v, var) in variants.iter().enumerate().skip(1) {
        let s = sorted(as_slopes(&nsf, &per_path, v));
        if !s.is_empty() {
            let m = quantile(&s, 0.5);
            report.reference.push(ReferenceCheck {
                reference: var.label.clone(),
                slope: m,
                shift: m - med,
            });
        }
    }
    Ok(report)
}

fn simplex_sums(sig: &DrivingSignal, alpha: &MultiIndex, plan: &ExperimentPlan, ns: &[usize]) -> Result<Vec<f64>> {
    ns.iter()
        .map(|&n| {
            let grid = match plan.refine.refine_for(n, plan.n_fine) {
                Some(r) => StepGrid::new(plan.n_fine, n, r)?,
                None => StepGrid::full(plan.n_fine, n)?,
            };
            let table = StepIntegralTable::build(sig, &grid, std::slice::from_ref(alpha))?;
            let vals: Vec<f64> = (0..n).map(|k| table.row(k)[0]).collect();
            Ok(pairwise_sum(&vals))
        })
        .collect()
}

fn scaling_experiment(plan: &ExperimentPlan, alpha: &MultiIndex, centered: bool, tolerance: Option<f64>) -> Result<RateReport> {
    let h = plan.hurst_vector()?;
    alpha.check_alphabet(h.m()).map_err(|e| Error::Config(e.to_string()))?;
    let ns = plan.usable_n();
    let (theory, log_factor) = if centered {
        let odd = alpha
            .counts(h.m())
            .iter()
            .enumerate()
            .any(|(j, &c)| !h.is_time(j + 1) && c % 2 == 1);
        if odd {
            return Err(Error::Config(format!(
                "centered scaling needs even fBm letter counts, {alpha} has an odd one"
            )));
        }
        omega_theory(alpha, &h)
    } else {
        (nu_theory(alpha, &h), false)
    };
    let means: Vec<f64> = if centered {
        let d1 = d_gamma_default(alpha, &h, 1.0)?;
        let h_alpha = h.weight(alpha);
        ns.iter()
            .map(|&n| n as f64 * d1 * (plan.horizon / n as f64).powf(h_alpha))
            .collect()
    } else {
        vec![0.0; ns.len()]
    };
    let gen = SignalGenerator::new(&plan.signal_spec()?)?;
    let sums: Vec<Vec<f64>> = (0..plan.paths as u64)
        .into_par_iter()
        .map(|p| simplex_sums(&gen.generate(p), alpha, plan, &ns))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut errs = Vec::new();
    let mut log_se = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let dev: Vec<f64> = sums.iter().map(|s| s[i] - means[i]).collect();
        let sq: Vec<f64> = dev.iter().map(|x| x * x).collect();
        let (m, se) = mean_and_se(&sq);
        let value = m.sqrt();
        let abs = sorted(dev.iter().map(|x| x.abs()).collect());
        rows.push(RateRow {
            n,
            value,
            std_error: Some(se / (2.0 * value)).filter(|x| x.is_finite()),
            q25: quantile(&abs, 0.25),
            median: quantile(&abs, 0.5),
            q75: quantile(&abs, 0.75),
            paths_used: dev.len(),
            excluded: 0,
        });
        errs.push(value);
        log_se.push(se / (2.0 * m));
    }
    let tag = if centered { "omega" } else { "nu" };
    let tol = tolerance.unwrap_or(if centered { 0.07 } else { 0.05 });
    let mut report = RateReport::new(plan, tag, alpha.dotted(), theory, tol, rows);
    report.theory_detail = format!("H_alpha = {}", h.weight(alpha));
    if log_se.iter().any(|s| !s.is_finite()) {
        warn!("{}: Monte Carlo errors unavailable, fitting without them", report.name);
    }
    let nsf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let se = log_se.iter().all(|s| s.is_finite()).then_some(log_se.as_slice());
    if errs.iter().all(|e| *e > 0.0) {
        let fit = fit_power_law(&nsf, &errs, se, log_factor)?;
        report.apply_fit(&fit);
    } else {
        report.verdict = Verdict::Skipped;
        report.note = Some("zero sums; nothing to fit".into());
    }
    Ok(report)
}

/// L₂ norm of `Σ_k x^α_{t_k,t_{k+1}}` against `n`.
pub fn nu_scaling_experiment(plan: &ExperimentPlan, alpha: &MultiIndex, tolerance: Option<f64>) -> Result<RateReport> {
    scaling_experiment(plan, alpha, false, tolerance)
}

/// The same sum centered by `n D_α(T/n)`.
pub fn omega_scaling_experiment(plan: &ExperimentPlan, alpha: &MultiIndex, tolerance: Option<f64>) -> Result<RateReport> {
    scaling_experiment(plan, alpha, true, tolerance)
}

pub fn run_experiment(plan: &ExperimentPlan, experiment: &Experiment) -> Result<RateReport> {
    match experiment {
        Experiment::AlmostSure { scheme, tolerance } => as_rate_experiment(plan, scheme, *tolerance),
        Experiment::Lp { scheme, tolerance } => lp_rate_experiment(plan, scheme, *tolerance),
        Experiment::Nu { alpha, tolerance } => nu_scaling_experiment(plan, alpha, *tolerance),
        Experiment::Omega { alpha, tolerance } => omega_scaling_experiment(plan, alpha, *tolerance),
    }
}

/// Validates the plan and runs its experiments in order.
pub fn run_plan(plan: &ExperimentPlan) -> Result<Vec<RateReport>> {
    plan.validate()?;
    plan.experiments.iter().map(|e| run_experiment(plan, e)).collect()
}

impl RateReport {
    fn apply_fit(&mut self, fit: &PowerFit) {
        self.slope = fit.slope;
        self.intercept = fit.intercept;
        self.ci = fit.ci;
        self.log_log = fit.log_log;
        self.verdict = verdict(fit.slope, self.theory, self.tolerance);
    }
}
