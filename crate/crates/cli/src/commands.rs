use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rough_taylor::rates::{self, mean_and_se, pairwise_sum, ExperimentPlan, RefineRule, Verdict};
use rough_taylor::schemes::{solve_model, SchemeConfig, SchemeKind, SolveStatus};
use rough_taylor::signal::SignalGenerator;
use rough_taylor::{ExponentVector, ModelSpec, SignalSpec};

use crate::manifest::{unwrap_config, Run};
use crate::{ConfigError, Failure};

fn default_horizon() -> f64 {
    1.0
}
fn one() -> usize {
    1
}

/// Reads a config file; a manifest written by an earlier run also works.
fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    serde_json::from_value(unwrap_config(value)).map_err(|e| ConfigError(format!("{}: {e}", path.display())).into())
}

fn signal_spec(hurst: &[f64], horizon: f64, n_fine: usize, seed: u64) -> Result<SignalSpec> {
    let h = ExponentVector::hurst(hurst.to_vec()).map_err(|e| ConfigError(e.to_string()))?;
    let time = h.has_time_letter();
    SignalSpec::new(h, horizon, n_fine, seed, time).map_err(|e| ConfigError(e.to_string()).into())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    /// A leading 1 makes component 1 the time path.
    pub hurst: Vec<f64>,
    #[serde(rename = "T", default = "default_horizon")]
    pub horizon: f64,
    pub n_fine: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub paths: usize,
}

pub fn simulate(config: &Path, seed: Option<u64>, out: &Path) -> Result<()> {
    let mut cfg: SimulateConfig = read_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let spec = signal_spec(&cfg.hurst, cfg.horizon, cfg.n_fine, cfg.seed)?;
    if cfg.paths == 0 {
        return Err(ConfigError("paths must be positive".into()).into());
    }
    let gen = SignalGenerator::new(&spec)?;
    let mut run = Run::start(out, "simulate", serde_json::to_value(&cfg)?, cfg.seed)?;

    let signals: Vec<_> = (0..cfg.paths as u64).into_par_iter().map(|p| gen.generate(p)).collect();
    let mut terminal = vec![Vec::new(); spec.m];
    for (p, sig) in signals.iter().enumerate() {
        let mut buf = Vec::new();
        sig.write_to(&mut buf)?;
        run.output(&format!("path_{p:05}.bin"), &buf)?;
        for (j, t) in terminal.iter_mut().enumerate() {
            t.push(*sig.component(j + 1).last().unwrap());
        }
    }

    let mut stats = Vec::new();
    for (j, t) in terminal.iter().enumerate() {
        let h = spec.hurst.value(j + 1);
        let (mean, _) = mean_and_se(t);
        let var = if t.len() > 1 {
            let dev: Vec<f64> = t.iter().map(|x| (x - mean).powi(2)).collect();
            pairwise_sum(&dev) / (t.len() - 1) as f64
        } else {
            f64::NAN
        };
        let is_time = j == 0 && spec.component_1_is_time;
        let theory = if is_time { 0.0 } else { cfg.horizon.powf(2.0 * h) };
        println!(
            "component {}: H = {h}, terminal mean {mean:.4e}, variance {var:.4e} (theory {theory:.4e}) over {} paths",
            j + 1,
            t.len()
        );
        stats.push(serde_json::json!({
            "component": j + 1, "hurst": h, "time": is_time,
            "terminal_mean": mean, "terminal_variance": var, "theory_variance": theory,
        }));
    }
    let summary = serde_json::json!({
        "manifest": run.reference(), "spec": spec, "paths": cfg.paths, "components": stats,
    });
    run.output("summary.json", &serde_json::to_vec_pretty(&summary)?)?;
    run.finish("ok")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub model: ModelSpec,
    pub hurst: Vec<f64>,
    #[serde(rename = "T", default = "default_horizon")]
    pub horizon: f64,
    pub n_fine: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub paths: usize,
    pub scheme: SchemeKind,
    pub n_values: Vec<usize>,
    #[serde(default)]
    pub refine: RefineRule,
    #[serde(default)]
    pub interpolate_in_step: bool,
    #[serde(default)]
    pub allow_non_hierarchical: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence_threshold: Option<f64>,
}

pub fn solve(config: &Path, seed: Option<u64>, out: &Path, strict: bool) -> Result<()> {
    let mut cfg: SolveConfig = read_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let spec = signal_spec(&cfg.hurst, cfg.horizon, cfg.n_fine, cfg.seed)?;
    let model = cfg.model.build().map_err(|e| ConfigError(e.to_string()))?;
    if model.alphabet() != spec.m {
        return Err(ConfigError(format!(
            "model {} is driven by {} components, config gives {} Hurst values",
            model.name,
            model.alphabet(),
            spec.m
        ))
        .into());
    }
    if cfg.paths == 0 || cfg.n_values.is_empty() {
        return Err(ConfigError("need at least one path and one n".into()).into());
    }
    let mut configs = Vec::new();
    for &n in &cfg.n_values {
        if n == 0 || cfg.n_fine % n != 0 {
            return Err(ConfigError(format!("n = {n} must divide n_fine = {}", cfg.n_fine)).into());
        }
        let mut sc = SchemeConfig::new(cfg.scheme.clone(), n);
        sc.refine_factor = cfg.refine.refine_for(n, cfg.n_fine);
        sc.interpolate_in_step = cfg.interpolate_in_step;
        sc.allow_non_hierarchical = cfg.allow_non_hierarchical;
        if let Some(t) = cfg.divergence_threshold {
            sc.divergence_threshold = t;
        }
        configs.push(sc);
    }
    let gen = SignalGenerator::new(&spec)?;
    let mut run = Run::start(out, "solve", serde_json::to_value(&cfg)?, cfg.seed)?;

    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..cfg.paths).map(move |p| (c, p)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(c, p)| solve_model(&model, &gen.generate(p as u64), &configs[c]))
        .collect::<rough_taylor::Result<Vec<_>>>()?;

    let label = cfg.scheme.label();
    let mut rows = Vec::new();
    let mut diverged = 0;
    for (&(c, p), res) in jobs.iter().zip(&results) {
        let n = configs[c].coarse_n;
        let name = format!("{label}_n{n}_path{p:05}.csv");
        let mut buf = Vec::new();
        res.write_csv(&mut buf)?;
        run.output(&name, &buf)?;
        let step = match res.status {
            SolveStatus::Diverged { step } => {
                diverged += 1;
                eprintln!("warning: path {p} at n = {n} diverged at step {step}");
                Some(step)
            }
            SolveStatus::Completed => None,
        };
        rows.push(serde_json::json!({
            "n": n, "path": p, "file": name, "diverged_at": step, "terminal": res.terminal(),
        }));
    }
    println!(
        "{label}: {} trajectories written to {}, {diverged} diverged",
        results.len(),
        run.dir().display()
    );
    let summary = serde_json::json!({
        "manifest": run.reference(), "scheme": label, "set": results[0].provenance.set,
        "correction": results[0].provenance.correction, "diverged": diverged, "runs": rows,
    });
    run.output("summary.json", &serde_json::to_vec_pretty(&summary)?)?;
    if strict && diverged > 0 {
        run.finish("diverged")?;
        return Err(Failure::Strict(format!("{diverged} trajectories diverged")).into());
    }
    run.finish("ok")
}

/// A built-in plan name, or a path to a plan file.
pub fn load_plan(source: &str) -> Result<ExperimentPlan> {
    if rates::BUILTIN_PLANS.contains(&source) {
        return Ok(rates::builtin_plan(source)?);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(ConfigError(format!(
            "{source:?} is neither a built-in plan {:?} nor a file",
            rates::BUILTIN_PLANS
        ))
        .into());
    }
    read_config(path)
}

pub fn rates(source: &str, seed: Option<u64>, out: &Path) -> Result<()> {
    let mut plan = load_plan(source)?;
    if let Some(s) = seed {
        plan.seed = s;
    }
    plan.validate()?;
    let mut run = Run::start(out, "rates", serde_json::to_value(&plan)?, plan.seed)?;
    let mut reports = Vec::new();
    for e in &plan.experiments {
        log::info!("running {}.{}", e.tag(), e.label());
        let report = rates::run_experiment(&plan, e).with_context(|| format!("experiment {}.{}", e.tag(), e.label()))?;
        println!("{}", report.summary());
        let mut csv = Vec::new();
        report.write_csv(&mut csv)?;
        run.output(&format!("{}.csv", report.name), &csv)?;
        let mut js = serde_json::to_value(&report)?;
        js["manifest"] = run.reference();
        run.output(&format!("{}.json", report.name), &serde_json::to_vec_pretty(&js)?)?;
        reports.push(report);
    }
    let mut plot = Vec::new();
    rates::write_plotdata(&reports, &mut plot)?;
    run.output("plotdata.csv", &plot)?;
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.verdict.ok())
        .map(|r| r.name.as_str())
        .collect();
    let summary = serde_json::json!({
        "manifest": run.reference(),
        "plan": plan.name,
        "verdicts": reports.iter().map(|r| (r.name.clone(), r.verdict)).collect::<std::collections::BTreeMap<_, _>>(),
        "pass": failed.is_empty(),
    });
    run.output("summary.json", &serde_json::to_vec_pretty(&summary)?)?;
    if !failed.is_empty() {
        run.finish("fail")?;
        return Err(Failure::Verdict(format!("failing verdicts: {}", failed.join(", "))).into());
    }
    let skipped = reports.iter().filter(|r| r.verdict == Verdict::Skipped).count();
    if skipped > 0 {
        eprintln!("note: {skipped} experiments skipped");
    }
    run.finish("ok")
}
