use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::metrics::{mean_series, regret_curve, sublinearity_fit, ExponentFit};
use super::run::{ExperimentResult, RunResult};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::policies::PolicyKind;
use crate::solvers::UtilityKind;

pub const CSV_HEADER: [&str; 8] = [
    "t",
    "phase",
    "selected_pairs",
    "participated",
    "utility",
    "oracle_utility",
    "cum_regret",
    "ms",
];

pub const SUMMARY_FILE: &str = "summary.json";
pub const SWEEP_SUMMARY_FILE: &str = "sweep_summary.json";

pub fn csv_file_name(policy: PolicyKind, seed: u64) -> String {
    format!("{policy}_seed{seed}.csv")
}

/// Writes one run as CSV.
pub fn write_run_csv(path: &Path, run: &RunResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(CSV_HEADER).map_err(csv_error)?;
    for log in &run.logs {
        w.write_record([
            log.t.to_string(),
            log.phase.clone(),
            log.selected_summary(),
            log.participated.len().to_string(),
            log.utility.to_string(),
            log.oracle_utility.to_string(),
            log.cum_regret.to_string(),
            log.ms.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidInput(format!("csv: {other:?}")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub policy: PolicyKind,
    pub seed: u64,
    pub cumulative_utility: f64,
    pub cumulative_realized_utility: f64,
    pub final_regret: f64,
    pub final_realized_regret: f64,
    pub participated: usize,
    pub z_shortfall_rounds: usize,
    pub metadata: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: PolicyKind,
    /// Seed means.
    pub cumulative_utility: f64,
    pub cumulative_realized_utility: f64,
    pub final_regret: f64,
    /// Exponent of the seed-mean regret over the second half of the horizon;
    /// absent when that regret is not positive there.
    pub regret_exponent: Option<ExponentFit>,
    /// Only for non-convex runs: regret against `1/delta` times the reference.
    pub delta: Option<f64>,
    pub final_delta_regret: Option<f64>,
    pub delta_regret_exponent: Option<ExponentFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub horizon: u64,
    pub seeds: Vec<u64>,
    pub utility: UtilityKind,
    /// Worst-case standard error of each ground-truth probability.
    pub truth_standard_error: f64,
    pub policies: Vec<PolicySummary>,
    pub runs: Vec<RunSummary>,
    pub config: serde_json::Value,
}

/// `delta` used for non-convex regret: the reciprocal of FLGreedy's ratio.
pub fn nonconvex_delta(epsilon: f64, num_es: usize) -> f64 {
    (1.0 + epsilon) * (2.0 + 2.0 * num_es as f64)
}

fn run_summary(run: &RunResult) -> RunSummary {
    let realized_regret: f64 = run
        .logs
        .iter()
        .map(|l| l.oracle_realized_utility - l.realized_utility)
        .sum();
    RunSummary {
        policy: run.policy,
        seed: run.seed,
        cumulative_utility: run.cumulative_utility(),
        cumulative_realized_utility: run.cumulative_realized_utility(),
        final_regret: run.logs.last().map_or(0.0, |l| l.cum_regret),
        final_realized_regret: realized_regret,
        participated: run.logs.iter().map(|l| l.participated.len()).sum(),
        z_shortfall_rounds: run.logs.iter().filter(|l| l.z_shortfall > 0).count(),
        metadata: run.metadata.clone(),
    }
}

impl ExperimentResult {
    pub fn summary(&self) -> Result<ExperimentSummary> {
        let cfg = &self.config;
        let mut policies = Vec::new();
        for &kind in &cfg.run.policies {
            let runs: Vec<&RunResult> = self.runs_of(kind).collect();
            let k = runs.len() as f64;
            let mean = |f: &dyn Fn(&RunResult) -> f64| runs.iter().map(|r| f(r)).sum::<f64>() / k;
            let regret = mean_series(&runs.iter().map(|r| r.regret()).collect::<Vec<_>>())?;
            let (delta, final_delta, delta_fit) = if cfg.run.utility == UtilityKind::Nonconvex {
                let d = nonconvex_delta(cfg.solver.epsilon, cfg.network.num_es);
                let curves = runs
                    .iter()
                    .map(|r| regret_curve(&r.utilities(), &r.oracle_utilities(), Some(d)))
                    .collect::<Result<Vec<_>>>()?;
                let m = mean_series(&curves)?;
                (Some(d), m.last().copied(), sublinearity_fit(&m, 0.5).ok())
            } else {
                (None, None, None)
            };
            policies.push(PolicySummary {
                policy: kind,
                cumulative_utility: mean(&RunResult::cumulative_utility),
                cumulative_realized_utility: mean(&RunResult::cumulative_realized_utility),
                final_regret: regret.last().copied().unwrap_or(0.0),
                regret_exponent: sublinearity_fit(&regret, 0.5).ok(),
                delta,
                final_delta_regret: final_delta,
                delta_regret_exponent: delta_fit,
            });
        }
        Ok(ExperimentSummary {
            name: cfg.name.clone(),
            horizon: cfg.run.horizon,
            seeds: cfg.run.seeds.clone(),
            utility: cfg.run.utility,
            truth_standard_error: self.truth_standard_error,
            policies,
            runs: self.runs.iter().map(run_summary).collect(),
            config: serde_json::to_value(cfg)?,
        })
    }

    /// Writes one CSV per (policy, seed) plus `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<ExperimentSummary> {
        fs::create_dir_all(dir)?;
        for run in &self.runs {
            write_run_csv(&dir.join(csv_file_name(run.policy, run.seed)), run)?;
        }
        let summary = self.summary()?;
        fs::write(
            dir.join(SUMMARY_FILE),
            serde_json::to_string_pretty(&summary)? + "\n",
        )?;
        Ok(summary)
    }
}

pub fn read_summary(dir: &Path) -> Result<ExperimentSummary> {
    let path = dir.join(SUMMARY_FILE);
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::config(path.display().to_string(), e.to_string()))
}

/// Per-policy table sorted by cumulative utility, followed by the pairwise
/// ordering of every two policies.
pub fn render_report(summary: &ExperimentSummary) -> String {
    let mut rows: Vec<&PolicySummary> = summary.policies.iter().collect();
    rows.sort_by(|a, b| b.cumulative_utility.total_cmp(&a.cumulative_utility));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} | T = {} | {} seed(s) | {} utility",
        summary.name,
        summary.horizon,
        summary.seeds.len(),
        summary.utility.as_str()
    );
    let _ = writeln!(
        out,
        "{:<8} {:>14} {:>12} {:>10} {:>8}",
        "policy", "cum_utility", "regret", "exponent", "r2"
    );
    for p in &rows {
        let (slope, r2) = p
            .regret_exponent
            .map_or(("-".to_string(), "-".to_string()), |f| {
                (format!("{:.3}", f.slope), format!("{:.3}", f.r_squared))
            });
        let _ = writeln!(
            out,
            "{:<8} {:>14.3} {:>12.3} {:>10} {:>8}",
            p.policy.as_str(),
            p.cumulative_utility,
            p.final_regret,
            slope,
            r2
        );
    }
    if rows.len() > 1 {
        let _ = writeln!(
            out,
            "\npairwise ordering (row vs column, by cumulative utility)"
        );
        let _ = write!(out, "{:<8}", "");
        for c in &rows {
            let _ = write!(out, " {:>7}", c.policy.as_str());
        }
        let _ = writeln!(out);
        for r in &rows {
            let _ = write!(out, "{:<8}", r.policy.as_str());
            for c in &rows {
                let sym = if r.policy == c.policy {
                    "="
                } else if r.cumulative_utility > c.cumulative_utility {
                    ">"
                } else if r.cumulative_utility < c.cumulative_utility {
                    "<"
                } else {
                    "~"
                };
                let _ = write!(out, " {sym:>7}");
            }
            let _ = writeln!(out);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: String,
    pub dir: PathBuf,
    /// Seed-mean cumulative utility per policy.
    pub cumulative_utility: BTreeMap<PolicyKind, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub axis: String,
    pub key: String,
    pub points: Vec<SweepPoint>,
}

/// One experiment per axis value, each in its own subdirectory of `out`,
/// plus `sweep_summary.json`.
pub fn run_sweep(
    base: &ExperimentConfig,
    axis: &str,
    values: &[String],
    out: &Path,
    exec: Execution,
) -> Result<SweepSummary> {
    if values.is_empty() {
        return Err(Error::config(axis, "sweep needs at least one value"));
    }
    let key = super::config::resolve_alias(axis).to_string();
    base.numeric(&key)?;
    let mut points = Vec::new();
    for raw in values {
        let cfg = base.with_override(&key, raw)?;
        let dir = out.join(format!("{axis}={raw}"));
        let summary = super::run::run_experiment(&cfg, exec)?.write(&dir)?;
        points.push(SweepPoint {
            value: raw.clone(),
            dir,
            cumulative_utility: summary
                .policies
                .iter()
                .map(|p| (p.policy, p.cumulative_utility))
                .collect(),
        });
    }
    let sweep = SweepSummary {
        axis: axis.to_string(),
        key,
        points,
    };
    fs::create_dir_all(out)?;
    fs::write(
        out.join(SWEEP_SUMMARY_FILE),
        serde_json::to_string_pretty(&sweep)? + "\n",
    )?;
    Ok(sweep)
}
