use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::plan::ExperimentPlan;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl Verdict {
    /// Skipped tests do not fail a run.
    pub fn ok(self) -> bool {
        self != Verdict::Fail
    }
}

/// Error statistics at one ladder point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    /// The quantity regressed: L_p error, L₂ norm, or median sup error.
    pub value: f64,
    pub std_error: Option<f64>,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub paths_used: usize,
    pub excluded: usize,
}

/// Slope obtained with an alternative reference solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCheck {
    pub reference: String,
    pub slope: f64,
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub name: String,
    pub slope: f64,
    /// 95% half-width of the slope.
    pub ci: f64,
    /// Theoretical slope (negative rate exponent).
    pub theory: f64,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub experiment: String,
    pub label: String,
    pub intercept: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_log: Option<f64>,
    pub theory_detail: String,
    /// Per-path slope quartiles for the pathwise experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_quantiles: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pooled_slope: Option<f64>,
    pub paths: usize,
    pub excluded_paths: usize,
    pub seed: u64,
    pub p: f64,
    #[serde(default)]
    pub reference: Vec<ReferenceCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub rows: Vec<RateRow>,
}

impl RateReport {
    pub(crate) fn new(plan: &ExperimentPlan, experiment: &str, label: String, theory: f64, tolerance: f64, rows: Vec<RateRow>) -> Self {
        RateReport {
            name: format!("{}.{experiment}.{label}", plan.name),
            slope: 0.0,
            ci: 0.0,
            theory,
            verdict: Verdict::Fail,
            tolerance,
            experiment: experiment.into(),
            label,
            intercept: 0.0,
            log_log: None,
            theory_detail: String::new(),
            slope_quantiles: None,
            pooled_slope: None,
            paths: plan.paths,
            excluded_paths: 0,
            seed: plan.seed,
            p: plan.p,
            reference: Vec::new(),
            note: None,
            rows,
        }
    }

    /// One line for terminals and logs.
    pub fn summary(&self) -> String {
        format!(
            "{}: slope {:.4} ± {:.4}, theory {:.4} ± {:.2} -> {:?}",
            self.name, self.slope, self.ci, self.theory, self.tolerance, self.verdict
        )
    }

    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "n,value,std_error,q25,median,q75,paths_used,excluded")?;
        for r in &self.rows {
            let se = r.std_error.map(|s| format!("{s:e}")).unwrap_or_default();
            writeln!(
                w,
                "{},{:e},{se},{:e},{:e},{:e},{},{}",
                r.n, r.value, r.q25, r.median, r.q75, r.paths_used, r.excluded
            )?;
        }
        Ok(())
    }
}

/// Writes `<name>.csv` and `<name>.json` into `dir`.
pub fn emit_report(report: &RateReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{}.csv", report.name));
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    fs::write(&csv, buf)?;
    let json = dir.join(format!("{}.json", report.name));
    fs::write(&json, serde_json::to_string_pretty(report)?)?;
    Ok(vec![csv, json])
}

/// Long-format `report,series,n,value` with the measured values, the
/// fitted line and the theoretical slope anchored at the first point.
pub fn write_plotdata(reports: &[RateReport], w: &mut impl Write) -> Result<()> {
    writeln!(w, "report,series,n,value")?;
    for r in reports {
        let Some(first) = r.rows.first() else { continue };
        for row in &r.rows {
            let n = row.n as f64;
            writeln!(w, "{},measured,{},{:e}", r.name, row.n, row.value)?;
            writeln!(w, "{},fit,{},{:e}", r.name, row.n, (r.intercept + r.slope * n.ln()).exp())?;
            let anchored = first.value * (n / first.n as f64).powf(r.theory);
            writeln!(w, "{},theory,{},{:e}", r.name, row.n, anchored)?;
        }
    }
    Ok(())
}
