//! Experiment driver: budget sweeps, repeated trials and result emission.
//!
//! Each cell of a sweep splits the data with seed `base_seed + trial`, trains
//! the configured learner on the train side and evaluates it against
//! strategic test agents whose budgets follow `tau * fractions`.

pub mod results;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineKind, TrainingObjective};
use crate::constrained::{solve_constrained, solve_constrained_with_estimate, ConstrainedRunConfig};
use crate::cost::{L2BudgetCost, ScalarMap, ScaledSeparableCost};
use crate::domain::{Dataset, LinearClassifier, RandomizedClassifier};
use crate::error::{Error, Result};
use crate::eval::{randomized_errors, strategic_errors, ErrorReport};
use crate::ingest::{split, DatasetSource, LoadedDataset, Standardizer};
use crate::minimax::{solve_minimax, MinimaxRunConfig, TraceRow, DEFAULT_MAX_ITERATIONS};
use crate::oracle::{robust_shift, OracleConfig};
use crate::separable::{solve_objective_1, solve_objective_2, SeparableConfig, DEFAULT_MAX_GRID_POINTS};

pub use results::{
    aggregate, emit_results, pareto_frontier, Aggregate, ResultRecord, ResultsFile, Stat, SCHEMA_VERSION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Alg1Obj1,
    Alg1Obj2,
    Alg2,
    Alg3,
    BaselineNonStrategic,
    BaselineNaive,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Alg1Obj1 => "alg1_obj1",
            Algorithm::Alg1Obj2 => "alg1_obj2",
            Algorithm::Alg2 => "alg2",
            Algorithm::Alg3 => "alg3",
            Algorithm::BaselineNonStrategic => "baseline_non_strategic",
            Algorithm::BaselineNaive => "baseline_naive",
        }
    }

    fn baseline(self) -> Option<BaselineKind> {
        match self {
            Algorithm::BaselineNonStrategic => Some(BaselineKind::NonStrategic),
            Algorithm::BaselineNaive => Some(BaselineKind::NaiveStrategic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BaselineObjective {
    #[default]
    Minimax,
    Constrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    None,
    #[default]
    FirstTrial,
    All,
}

/// Settings for the exact separable solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeparableSettings {
    /// Score `b(x)` (also used as `a(x)`); the first feature when unset.
    pub score: Option<ScalarMap>,
    pub score_sup: Option<f64>,
    pub max_grid_points: u64,
}

impl Default for SeparableSettings {
    fn default() -> Self {
        SeparableSettings {
            score: None,
            score_sup: None,
            max_grid_points: DEFAULT_MAX_GRID_POINTS,
        }
    }
}

/// Where the dataset comes from: a spec file or an inline description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetEntry {
    File { spec: PathBuf },
    Inline(DatasetSource),
}

fn default_name() -> String {
    "experiment".into()
}
fn default_gamma() -> f64 {
    0.1
}
fn default_epsilon() -> f64 {
    0.3
}
fn default_trials() -> usize {
    8
}
fn default_test_fraction() -> f64 {
    0.3
}
fn default_pareto_points() -> usize {
    20
}
fn default_max_iterations() -> usize {
    DEFAULT_MAX_ITERATIONS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub dataset: DatasetEntry,
    pub algorithm: Algorithm,
    /// Global budget sweep.
    pub taus: Vec<f64>,
    /// Per-group budget fractions `f`; budgets are `tau * f`.
    pub fractions: Vec<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Explicit fairness slacks for a Pareto sweep.
    #[serde(default)]
    pub gammas: Option<Vec<f64>>,
    /// Number of slacks in `[0, 0.5 - gamma_hat]` when `gammas` is unset.
    #[serde(default = "default_pareto_points")]
    pub pareto_points: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    /// Round count override for the iterative solvers.
    #[serde(default)]
    pub iterations: Option<usize>,
    /// Round count override for the minmax-estimation phase.
    #[serde(default)]
    pub estimate_iterations: Option<usize>,
    /// Dual bound override for the constrained solver.
    #[serde(default)]
    pub bound: Option<f64>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub baseline_objective: BaselineObjective,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub separable: SeparableSettings,
    #[serde(default)]
    pub trace: TraceMode,
    /// Store measured wall-clock times. Off by default so that result files
    /// are reproducible byte for byte.
    #[serde(default)]
    pub record_wall_clock: bool,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.taus.is_empty() {
            return Err(Error::Config("taus must not be empty".into()));
        }
        if self.taus.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
            return Err(Error::Config("taus must be finite and nonnegative".into()));
        }
        if self.fractions.iter().any(|&f| !(0.0..=1.0).contains(&f)) {
            return Err(Error::Config("fractions must lie in [0, 1]".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.gamma >= 0.0) || !(self.epsilon > 0.0) {
            return Err(Error::Config("need gamma >= 0 and epsilon > 0".into()));
        }
        if let Some(gs) = &self.gammas {
            if gs.is_empty() || gs.iter().any(|&g| !(g >= 0.0)) {
                return Err(Error::Config("gammas must be a non-empty list of nonnegative values".into()));
            }
        }
        if self.pareto_points == 0 {
            return Err(Error::Config("pareto_points must be at least 1".into()));
        }
        self.oracle.validate()
    }

    fn minimax_config(&self, gamma: f64) -> MinimaxRunConfig {
        MinimaxRunConfig {
            gamma,
            iterations: self.iterations,
            max_iterations: self.max_iterations,
            log_every: 0,
        }
    }

    fn constrained_config(&self, gamma: f64) -> ConstrainedRunConfig {
        ConstrainedRunConfig {
            gamma,
            epsilon: self.epsilon,
            iterations: self.iterations,
            bound: self.bound,
            estimate_iterations: self.estimate_iterations,
            max_iterations: self.max_iterations,
            log_every: 0,
        }
    }

    fn baseline_objective(&self) -> TrainingObjective {
        match self.baseline_objective {
            BaselineObjective::Minimax => TrainingObjective::Minimax(self.minimax_config(self.gamma)),
            BaselineObjective::Constrained => TrainingObjective::Constrained(self.constrained_config(self.gamma)),
        }
    }
}

/// Resolves the dataset entry of a config located in `base`.
pub fn resolve_dataset(entry: &DatasetEntry, base: Option<&Path>) -> Result<(DatasetSource, Option<PathBuf>)> {
    match entry {
        DatasetEntry::File { spec } => {
            let path = match base {
                Some(dir) if spec.is_relative() => dir.join(spec),
                _ => spec.clone(),
            };
            let source = DatasetSource::from_file(&path)?;
            Ok((source, path.parent().map(Path::to_path_buf)))
        }
        DatasetEntry::Inline(source) => Ok((source.clone(), base.map(Path::to_path_buf))),
    }
}

/// Table-style summary of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub group_sizes: Vec<usize>,
    pub positives: Vec<usize>,
    pub dropped_rows: usize,
    pub expected_group_sizes: Option<Vec<usize>>,
}

impl DatasetStats {
    pub fn from_loaded(loaded: &LoadedDataset, expected: Option<Vec<usize>>) -> Self {
        let data = &loaded.dataset;
        let mut positives = vec![0; data.num_groups()];
        for a in data.agents().iter().filter(|a| a.label) {
            positives[a.group.0] += 1;
        }
        DatasetStats {
            name: loaded.name.clone(),
            n: data.len(),
            d: data.dim(),
            group_sizes: data.group_counts().to_vec(),
            positives,
            dropped_rows: loaded.dropped_rows,
            expected_group_sizes: expected,
        }
    }

    /// `None` when the spec declares no expected sizes.
    pub fn matches_expected(&self) -> Option<bool> {
        self.expected_group_sizes.as_ref().map(|e| *e == self.group_sizes)
    }
}

/// Loads the source described by a spec file and summarizes it.
pub fn inspect(spec_path: &Path) -> Result<DatasetStats> {
    let source = DatasetSource::from_file(spec_path)?;
    let loaded = source.load(spec_path.parent())?;
    Ok(DatasetStats::from_loaded(&loaded, source.expected_group_sizes()))
}

struct Prepared {
    train: Dataset,
    test: Dataset,
}

fn prepare(full: &Dataset, standardize: bool, test_fraction: f64, seed: u64) -> Result<Prepared> {
    let (train, test) = split(full, test_fraction, seed)?;
    if standardize {
        let scaler = Standardizer::fit(&train)?;
        Ok(Prepared {
            train: scaler.apply(&train)?,
            test: scaler.apply(&test)?,
        })
    } else {
        Ok(Prepared { train, test })
    }
}

/// One (sweep point, trial) unit of work. Pareto cells cover every slack.
#[derive(Debug, Clone, Copy)]
struct Cell {
    sweep_index: usize,
    tau: f64,
    trial: usize,
}

#[derive(Default)]
struct Outcome {
    train: Option<ErrorReport>,
    test: Option<ErrorReport>,
    trace: Option<Vec<TraceRow>>,
    oracle_calls: usize,
    iterations: usize,
    gamma_hat: Option<f64>,
    dual_regret: Option<f64>,
    regret_bound: Option<f64>,
    grid_points: Option<u64>,
}

fn evaluate_linear(
    model: &RandomizedClassifier<LinearClassifier>,
    data: &Prepared,
    cost: &L2BudgetCost,
    out: &mut Outcome,
) -> Result<()> {
    out.train = Some(randomized_errors(model, &data.train, cost)?);
    out.test = Some(randomized_errors(model, &data.test, cost)?);
    Ok(())
}

fn separable_cost(config: &ExperimentConfig, cost: &L2BudgetCost, dim: usize) -> Result<ScaledSeparableCost> {
    if cost.budgets().contains(&0.0) {
        return Err(Error::invalid(
            "the separable solver needs positive budgets (scales are 1 / budget)",
        ));
    }
    let score = config.separable.score.clone().unwrap_or_else(|| ScalarMap::coordinate(dim, 0));
    let scales = cost.budgets().iter().map(|t| 1.0 / t).collect();
    ScaledSeparableCost::new(scales, score.clone(), score, config.separable.score_sup)
}

fn run_single(config: &ExperimentConfig, data: &Prepared, cost: &L2BudgetCost, keep_trace: bool) -> Result<Outcome> {
    let mut out = Outcome::default();
    let groups = data.train.num_groups();
    match config.algorithm {
        Algorithm::Alg2 => {
            let run = solve_minimax(&data.train, cost, &config.oracle, &config.minimax_config(config.gamma))?;
            evaluate_linear(&run.model, data, cost, &mut out)?;
            out.oracle_calls = run.oracle_calls;
            out.iterations = run.iterations;
            out.dual_regret = Some(run.dual_regret);
            out.regret_bound = Some(run.regret_bound(groups));
            out.trace = keep_trace.then_some(run.trace.rows);
        }
        Algorithm::Alg3 => {
            let run = solve_constrained(&data.train, cost, &config.oracle, &config.constrained_config(config.gamma))?;
            evaluate_linear(&run.model, data, cost, &mut out)?;
            out.oracle_calls = run.total_oracle_calls();
            out.iterations = run.iterations;
            out.gamma_hat = Some(run.gamma_hat);
            out.dual_regret = Some(run.dual_regret);
            out.regret_bound = Some(run.regret_bound(groups));
            out.trace = keep_trace.then_some(run.trace.rows);
        }
        Algorithm::BaselineNonStrategic | Algorithm::BaselineNaive => {
            let kind = config.algorithm.baseline().expect("baseline algorithm");
            let trained = crate::baselines::train_baseline(
                kind,
                &data.train,
                &config.baseline_objective(),
                &config.oracle,
                cost,
            )?;
            evaluate_linear(&trained.model, data, cost, &mut out)?;
            out.oracle_calls = trained.oracle_calls;
            out.iterations = trained.model.support().len();
        }
        Algorithm::Alg1Obj1 | Algorithm::Alg1Obj2 => {
            let sep = separable_cost(config, cost, data.train.dim())?;
            let settings = SeparableConfig {
                max_grid_points: config.separable.max_grid_points,
            };
            let solution = if config.algorithm == Algorithm::Alg1Obj1 {
                solve_objective_1(&data.train, &sep, &settings)?
            } else {
                solve_objective_2(&data.train, &sep, config.gamma, config.epsilon, &settings)?
            };
            out.train = Some(strategic_errors(&solution.t_hat, &data.train, &sep)?);
            out.test = Some(strategic_errors(&solution.t_hat, &data.test, &sep)?);
            out.gamma_hat = Some(solution.minmax_value);
            out.grid_points = Some(solution.grid_points);
        }
    }
    Ok(out)
}

/// Slack grid for a Pareto sweep.
pub fn pareto_gammas(config: &ExperimentConfig, gamma_hat: f64) -> Vec<f64> {
    if let Some(gs) = &config.gammas {
        return gs.clone();
    }
    let top = (0.5 - gamma_hat).max(0.0);
    let p = config.pareto_points;
    if p == 1 {
        return vec![0.0];
    }
    (0..p).map(|i| top * i as f64 / (p - 1) as f64).collect()
}

fn run_pareto_cell(
    config: &ExperimentConfig,
    data: &Prepared,
    cost: &L2BudgetCost,
    keep_trace: bool,
) -> Result<Vec<(f64, Outcome)>> {
    let groups = data.train.num_groups();
    let (train_cost, shift) = match config.algorithm {
        Algorithm::Alg3 => (cost.clone(), None),
        Algorithm::BaselineNonStrategic => (L2BudgetCost::zero(groups), None),
        Algorithm::BaselineNaive => (L2BudgetCost::zero(groups), Some(cost.average_budget(&data.train)?)),
        other => {
            return Err(Error::Config(format!(
                "pareto sweeps need alg3 or a baseline, not {}",
                other.as_str()
            )))
        }
    };
    let base = config.constrained_config(config.gamma);
    let estimate = solve_minimax(&data.train, &train_cost, &config.oracle, &base.estimate_config())?;
    let gamma_hat = randomized_errors(&estimate.model, &data.train, &train_cost)?.max_group;
    let mut outs = Vec::new();
    for gamma in pareto_gammas(config, gamma_hat) {
        let run_cfg = config.constrained_config(gamma);
        let run = solve_constrained_with_estimate(&data.train, &train_cost, &config.oracle, &run_cfg, gamma_hat)?;
        let model = match shift {
            Some(s) => run.model.clone().map(|h| robust_shift(&h, s)),
            None => run.model.clone(),
        };
        let mut out = Outcome::default();
        evaluate_linear(&model, data, cost, &mut out)?;
        out.oracle_calls = run.oracle_calls + estimate.oracle_calls;
        out.iterations = run.iterations;
        out.gamma_hat = Some(gamma_hat);
        out.dual_regret = Some(run.dual_regret);
        out.regret_bound = Some(run.regret_bound(groups));
        out.trace = keep_trace.then(|| run.trace.rows.clone());
        outs.push((gamma, out));
    }
    Ok(outs)
}

/// Runtime options that do not belong in the recorded config.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Worker threads; 0 uses the rayon default.
    pub jobs: usize,
    pub pareto: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { jobs: 1, pareto: false }
    }
}

fn build_record(
    config: &ExperimentConfig,
    cell: Cell,
    seed: u64,
    cost: &L2BudgetCost,
    gamma: Option<(usize, f64)>,
    outcome: Result<Outcome>,
    wall_ms: u64,
) -> ResultRecord {
    let (out, error) = match outcome {
        Ok(o) => (o, None),
        Err(e) => (Outcome::default(), Some(e.to_string())),
    };
    ResultRecord {
        algorithm: config.algorithm.as_str().to_string(),
        sweep_index: cell.sweep_index,
        tau: cell.tau,
        gamma_index: gamma.map(|(i, _)| i),
        gamma: gamma.map_or(config.gamma, |(_, g)| g),
        fraction_vector: config.fractions.clone(),
        budgets: cost.budgets().to_vec(),
        trial: cell.trial,
        seed,
        train: out.train,
        test: out.test,
        trace: out.trace,
        oracle_calls: out.oracle_calls,
        iterations: out.iterations,
        gamma_hat: out.gamma_hat,
        dual_regret: out.dual_regret,
        regret_bound: out.regret_bound,
        grid_points: out.grid_points,
        wall_ms,
        error,
    }
}

fn run_cell(config: &ExperimentConfig, full: &Dataset, standardize: bool, cell: Cell, pareto: bool) -> Vec<ResultRecord> {
    let seed = config.base_seed.wrapping_add(cell.trial as u64);
    let started = Instant::now();
    let keep_trace = match config.trace {
        TraceMode::None => false,
        TraceMode::FirstTrial => cell.trial == 0,
        TraceMode::All => true,
    };
    let cost = match L2BudgetCost::from_profile(cell.tau, &config.fractions) {
        Ok(c) => c,
        Err(e) => return vec![build_record(config, cell, seed, &L2BudgetCost::zero(1), None, Err(e), 0)],
    };
    let elapsed = |started: Instant| {
        if config.record_wall_clock {
            started.elapsed().as_millis() as u64
        } else {
            0
        }
    };
    let prepared = prepare(full, standardize, config.test_fraction, seed);
    if !pareto {
        let outcome = prepared.and_then(|p| run_single(config, &p, &cost, keep_trace));
        return vec![build_record(config, cell, seed, &cost, None, outcome, elapsed(started))];
    }
    match prepared.and_then(|p| run_pareto_cell(config, &p, &cost, keep_trace)) {
        Ok(outs) => {
            let wall = elapsed(started);
            outs.into_iter()
                .enumerate()
                .map(|(i, (g, o))| build_record(config, cell, seed, &cost, Some((i, g)), Ok(o), wall))
                .collect()
        }
        Err(e) => vec![build_record(config, cell, seed, &cost, None, Err(e), elapsed(started))],
    }
}

/// Runs every (tau, trial) cell. Solver refusals are stored in the record
/// and do not abort the sweep. `base` resolves relative dataset paths.
pub fn run_experiment(config: &ExperimentConfig, base: Option<&Path>, options: RunOptions) -> Result<ResultsFile> {
    config.validate()?;
    let (source, data_base) = resolve_dataset(&config.dataset, base)?;
    let loaded = source.load(data_base.as_deref())?;
    let full = loaded.dataset;
    if config.fractions.len() != full.num_groups() {
        return Err(Error::Config(format!(
            "fractions has {} entries but the dataset has {} groups",
            config.fractions.len(),
            full.num_groups()
        )));
    }
    let standardize = source.standardize();
    let cells: Vec<Cell> = config
        .taus
        .iter()
        .enumerate()
        .flat_map(|(sweep_index, &tau)| (0..config.trials).map(move |trial| Cell { sweep_index, tau, trial }))
        .collect();
    let work = || -> Vec<ResultRecord> {
        cells
            .par_iter()
            .map(|&cell| run_cell(config, &full, standardize, cell, options.pareto))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    let mut records = if options.jobs == 1 {
        cells
            .iter()
            .flat_map(|&cell| run_cell(config, &full, standardize, cell, options.pareto))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        pool.install(work)
    };
    records.sort_by_key(|r: &ResultRecord| (r.sweep_index, r.gamma_index, r.trial));
    for r in records.iter().filter(|r| r.error.is_some()) {
        log::warn!(
            "tau {} trial {}: {}",
            r.tau,
            r.trial,
            r.error.as_deref().unwrap_or_default()
        );
    }
    let aggregates = aggregate(&records, options.pareto);
    Ok(ResultsFile {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        pareto: options.pareto,
        records,
        aggregates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{MarginGroup, SyntheticSpec};

    fn margin_config(algorithm: Algorithm) -> ExperimentConfig {
        ExperimentConfig {
            name: "t".into(),
            dataset: DatasetEntry::Inline(DatasetSource::Synthetic(SyntheticSpec::OneDimMargin {
                name: None,
                seed: 5,
                groups: vec![
                    MarginGroup {
                        negatives: 20,
                        positives: 20,
                        margin: 0.0,
                        spread: 2.5,
                        label_noise: 0.0,
                    },
                    MarginGroup {
                        negatives: 10,
                        positives: 10,
                        margin: 0.0,
                        spread: 2.5,
                        label_noise: 0.0,
                    },
                ],
                standardize: false,
            })),
            algorithm,
            taus: vec![0.0, 1.0],
            fractions: vec![1.0, 0.25],
            gamma: 0.2,
            epsilon: 0.3,
            gammas: None,
            pareto_points: 3,
            trials: 2,
            base_seed: 11,
            test_fraction: 0.3,
            iterations: Some(5),
            estimate_iterations: Some(5),
            bound: None,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            baseline_objective: BaselineObjective::Minimax,
            oracle: OracleConfig::default(),
            separable: SeparableSettings::default(),
            trace: TraceMode::FirstTrial,
            record_wall_clock: false,
        }
    }

    #[test]
    fn record_count_is_sweep_times_trials() {
        let out = run_experiment(&margin_config(Algorithm::Alg2), None, RunOptions::default()).unwrap();
        assert_eq!(out.records.len(), 4);
        assert!(out.records.iter().all(|r| r.error.is_none()));
        assert_eq!(out.records[0].oracle_calls, 5);
        assert!(out.records[0].trace.is_some() && out.records[1].trace.is_none());
        assert_eq!(out.aggregates.len(), 2);
    }

    #[test]
    fn refusals_do_not_abort_the_sweep() {
        let mut cfg = margin_config(Algorithm::Alg1Obj1);
        cfg.separable.max_grid_points = 1_000_000;
        let out = run_experiment(&cfg, None, RunOptions::default()).unwrap();
        // tau = 0 has no separable analogue
        assert!(out.records[0].error.is_some());
        assert!(out.records[2].error.is_none());
        assert!(out.records[2].grid_points.is_some());
    }

    #[test]
    fn parallel_and_serial_runs_agree() {
        let cfg = margin_config(Algorithm::BaselineNaive);
        let serial = run_experiment(&cfg, None, RunOptions::default()).unwrap();
        let parallel = run_experiment(&cfg, None, RunOptions { jobs: 3, pareto: false }).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn pareto_cells_expand_over_slacks() {
        let cfg = margin_config(Algorithm::Alg3);
        let out = run_experiment(&cfg, None, RunOptions { jobs: 1, pareto: true }).unwrap();
        assert_eq!(out.records.len(), 2 * 2 * 3);
        let r = &out.records[0];
        assert_eq!(r.oracle_calls, 10);
        assert_eq!(r.gamma_index, Some(0));
        assert!(out.aggregates.iter().any(|a| a.on_frontier == Some(true)));
    }

    #[test]
    fn fraction_length_is_checked() {
        let mut cfg = margin_config(Algorithm::Alg2);
        cfg.fractions = vec![1.0];
        assert!(matches!(run_experiment(&cfg, None, RunOptions::default()), Err(Error::Config(_))));
    }

    #[test]
    fn config_parses_from_toml() {
        let text = r#"
            algorithm = "alg2"
            taus = [0.5]
            fractions = [1.0, 0.5]
            [dataset]
            generator = "one_dim_margin"
            seed = 1
            [[dataset.groups]]
            negatives = 3
            positives = 3
            spread = 1.0
            [[dataset.groups]]
            negatives = 3
            positives = 3
            spread = 1.0
        "#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.trials, 8);
        assert!(matches!(cfg.dataset, DatasetEntry::Inline(DatasetSource::Synthetic(_))));
        let by_file = ExperimentConfig::from_toml_str(
            "algorithm = \"alg3\"\ntaus = [1.0]\nfractions = [1.0]\n[dataset]\nspec = \"specs/heart.toml\"\n",
        )
        .unwrap();
        assert!(matches!(by_file.dataset, DatasetEntry::File { .. }));
        assert!(ExperimentConfig::from_toml_str("algorithm = \"alg9\"\ntaus=[1.0]\nfractions=[1.0]\n[dataset]\nspec=\"x\"").is_err());
    }

    #[test]
    fn linspace_slacks() {
        let cfg = margin_config(Algorithm::Alg3);
        assert_eq!(pareto_gammas(&cfg, 0.1), vec![0.0, 0.2, 0.4]);
        assert_eq!(pareto_gammas(&cfg, 0.7), vec![0.0, 0.0, 0.0]);
    }
}
