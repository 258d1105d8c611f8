//! Result records, aggregation and file emission.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::error::{Error, Result};
use crate::eval::ErrorReport;
use crate::minimax::TraceRow;

pub const SCHEMA_VERSION: u32 = 1;

/// Outcome of one (sweep point, trial) cell, or of one slack within a
/// Pareto cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub algorithm: String,
    pub sweep_index: usize,
    pub tau: f64,
    pub gamma_index: Option<usize>,
    pub gamma: f64,
    pub fraction_vector: Vec<f64>,
    pub budgets: Vec<f64>,
    pub trial: usize,
    pub seed: u64,
    pub train: Option<ErrorReport>,
    pub test: Option<ErrorReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRow>>,
    pub oracle_calls: usize,
    pub iterations: usize,
    pub gamma_hat: Option<f64>,
    pub dual_regret: Option<f64>,
    pub regret_bound: Option<f64>,
    pub grid_points: Option<u64>,
    pub wall_ms: u64,
    /// Solver refusal or failure for this cell.
    pub error: Option<String>,
}

/// Mean, sample standard deviation and the `mean ± 1.96 std` band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Stat {
    /// `None` for an empty sample. A single value has zero spread.
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Stat {
            mean,
            std,
            lo: mean - 1.96 * std,
            hi: mean + 1.96 * std,
        })
    }
}

/// Trial aggregate for one sweep point (and slack, in Pareto mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub algorithm: String,
    pub sweep_index: usize,
    pub tau: f64,
    pub gamma_index: Option<usize>,
    pub gamma: Stat,
    pub trials: usize,
    pub failures: usize,
    pub test_max_group: Option<Stat>,
    pub test_overall: Option<Stat>,
    pub train_max_group: Option<Stat>,
    pub train_overall: Option<Stat>,
    /// Pareto mode: whether the mean test (max-group, overall) point is
    /// undominated among the slacks of its sweep point.
    pub on_frontier: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub pareto: bool,
    pub records: Vec<ResultRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl ResultsFile {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ResultsFile = serde_json::from_str(&text)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "results schema {} is not supported (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        Ok(file)
    }
}

/// Marks the points not dominated in both coordinates (smaller is better).
/// Duplicated points dominate neither each other.
pub fn pareto_frontier(points: &[(f64, f64)]) -> Vec<bool> {
    points
        .iter()
        .map(|&(a, b)| {
            !points
                .iter()
                .any(|&(c, d)| c <= a && d <= b && (c < a || d < b))
        })
        .collect()
}

/// Groups records by (sweep point, slack) and summarizes successful trials.
pub fn aggregate(records: &[ResultRecord], pareto: bool) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(usize, Option<usize>), Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.sweep_index, r.gamma_index)).or_default().push(r);
    }
    let mut out: Vec<Aggregate> = groups
        .into_values()
        .map(|rs| {
            let ok: Vec<&&ResultRecord> = rs.iter().filter(|r| r.error.is_none()).collect();
            let pick = |f: &dyn Fn(&ResultRecord) -> Option<f64>| {
                let values: Vec<f64> = ok.iter().filter_map(|r| f(r)).collect();
                Stat::of(&values)
            };
            let gammas: Vec<f64> = rs.iter().map(|r| r.gamma).collect();
            Aggregate {
                algorithm: rs[0].algorithm.clone(),
                sweep_index: rs[0].sweep_index,
                tau: rs[0].tau,
                gamma_index: rs[0].gamma_index,
                gamma: Stat::of(&gammas).expect("group is non-empty"),
                trials: ok.len(),
                failures: rs.len() - ok.len(),
                test_max_group: pick(&|r| r.test.as_ref().map(|e| e.max_group)),
                test_overall: pick(&|r| r.test.as_ref().map(|e| e.overall)),
                train_max_group: pick(&|r| r.train.as_ref().map(|e| e.max_group)),
                train_overall: pick(&|r| r.train.as_ref().map(|e| e.overall)),
                on_frontier: None,
            }
        })
        .collect();
    if pareto {
        let mut by_sweep: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, a) in out.iter().enumerate() {
            if a.test_max_group.is_some() && a.test_overall.is_some() {
                by_sweep.entry(a.sweep_index).or_default().push(i);
            }
        }
        for idx in by_sweep.values() {
            let points: Vec<(f64, f64)> = idx
                .iter()
                .map(|&i| {
                    let a = &out[i];
                    (a.test_max_group.unwrap().mean, a.test_overall.unwrap().mean)
                })
                .collect();
            for (&i, on) in idx.iter().zip(pareto_frontier(&points)) {
                out[i].on_frontier = Some(on);
            }
        }
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn stat_cells(s: Option<Stat>) -> String {
    match s {
        Some(s) => format!("{},{},{},{}", s.mean, s.std, s.lo, s.hi),
        None => ",,,".into(),
    }
}

fn max_group_table(file: &ResultsFile) -> String {
    let mut out = String::from(
        "algorithm,tau,gamma,trials,failures,\
         test_max_group_mean,test_max_group_std,test_max_group_lo,test_max_group_hi,\
         test_overall_mean,test_overall_std,test_overall_lo,test_overall_hi,\
         train_max_group_mean,train_max_group_std,train_max_group_lo,train_max_group_hi\n",
    );
    for a in &file.aggregates {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            a.algorithm,
            a.tau,
            a.gamma.mean,
            a.trials,
            a.failures,
            stat_cells(a.test_max_group),
            stat_cells(a.test_overall),
            stat_cells(a.train_max_group)
        );
    }
    out
}

fn convergence_table(file: &ResultsFile) -> String {
    let mut out = String::from(
        "algorithm,tau,gamma,trial,iteration,running_max_group_error,max_group_error,lagrangian\n",
    );
    for r in &file.records {
        let Some(rows) = &r.trace else { continue };
        for row in rows {
            let current = row.group_errors.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.algorithm,
                r.tau,
                r.gamma,
                r.trial,
                row.iteration,
                row.running_max_group_error,
                current,
                opt(row.lagrangian)
            );
        }
    }
    out
}

fn pareto_table(file: &ResultsFile) -> String {
    let mut out = String::from(
        "algorithm,tau,gamma_index,gamma_mean,trials,test_max_group_mean,test_overall_mean,\
         train_max_group_mean,train_overall_mean,on_frontier\n",
    );
    for a in file.aggregates.iter().filter(|a| a.gamma_index.is_some()) {
        let mean = |s: Option<Stat>| opt(s.map(|s| s.mean));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            a.algorithm,
            a.tau,
            a.gamma_index.unwrap_or_default(),
            a.gamma.mean,
            a.trials,
            mean(a.test_max_group),
            mean(a.test_overall),
            mean(a.train_max_group),
            mean(a.train_overall),
            a.on_frontier.map(|b| b.to_string()).unwrap_or_default()
        );
    }
    out
}

fn write(path: PathBuf, body: &str) -> Result<PathBuf> {
    std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes `results.json` plus the three tables into `dir`. Output depends
/// only on `file`, so identical results give identical bytes.
pub fn emit_results(file: &ResultsFile, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut json = serde_json::to_string_pretty(file)?;
    json.push('\n');
    Ok(vec![
        write(dir.join("results.json"), &json)?,
        write(dir.join("max_group_vs_tau.csv"), &max_group_table(file))?,
        write(dir.join("convergence.csv"), &convergence_table(file))?,
        write(dir.join("pareto.csv"), &pareto_table(file))?,
    ])
}
