//! Error minimization subject to minimax fairness.
//!
//! First the minimax solver estimates the minmax value `gamma_hat`. Then the
//! learner and a dual player play on the Lagrangian
//!
//! ```text
//! L(p, lambda) = l(p) + sum_g lambda_g (l_g(p) - slack),   slack = gamma_hat + gamma + epsilon
//! ```
//!
//! with `lambda` restricted to the capped simplex `{lambda >= 0, |lambda|_1 <= B}`.
//! The learner best responds through WERM with weights `lambda_g + n_g / n`,
//! and the dual player runs online projected gradient ascent with step
//! `t^{-1/2}`.

use serde::{Deserialize, Serialize};

use crate::cost::{BestResponse, L2BudgetCost};
use crate::domain::{Dataset, LinearClassifier, RandomizedClassifier};
use crate::error::{check_dim, Error, Result};
use crate::eval::{strategic_errors, ErrorReport};
use crate::minimax::{solve_minimax, MinimaxRunConfig, RunTrace, RunningMixture, TraceRow, DEFAULT_MAX_ITERATIONS};
use crate::oracle::{werm, GroupWeights, OracleConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstrainedRunConfig {
    pub gamma: f64,
    pub epsilon: f64,
    /// Replaces the derived round count `T` when set.
    pub iterations: Option<usize>,
    /// Replaces the derived dual bound `B = 4 / epsilon` when set.
    pub bound: Option<f64>,
    /// Round count for the minmax-estimation phase (derived from `epsilon`
    /// when unset).
    pub estimate_iterations: Option<usize>,
    pub max_iterations: usize,
    pub log_every: usize,
}

impl Default for ConstrainedRunConfig {
    fn default() -> Self {
        ConstrainedRunConfig {
            gamma: 0.0,
            epsilon: 0.3,
            iterations: None,
            bound: None,
            estimate_iterations: None,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            log_every: 0,
        }
    }
}

impl ConstrainedRunConfig {
    fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) {
            return Err(Error::invalid("gamma must be nonnegative"));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::invalid("epsilon must lie in (0, 1]"));
        }
        if let Some(b) = self.bound {
            if !(b > 0.0) {
                return Err(Error::invalid("dual bound B must be positive"));
            }
        }
        Ok(())
    }

    /// Settings for the minmax-estimation phase.
    pub fn estimate_config(&self) -> MinimaxRunConfig {
        MinimaxRunConfig {
            gamma: self.epsilon,
            iterations: self.estimate_iterations,
            max_iterations: self.max_iterations,
            log_every: self.log_every,
        }
    }
}

/// `T = ceil((4/eps * (8/eps^2 + G))^2)` and `B = 4/eps` (before overrides).
pub fn constrained_schedule(num_groups: usize, epsilon: f64) -> (u64, f64) {
    let inner = 4.0 / epsilon * (8.0 / (epsilon * epsilon) + num_groups as f64);
    let raw = (inner * inner).ceil();
    let rounds = if raw >= u64::MAX as f64 { u64::MAX } else { raw as u64 };
    (rounds, 4.0 / epsilon)
}

/// Dual iterate on the capped simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DualVector(pub Vec<f64>);

impl DualVector {
    pub fn zeros(groups: usize) -> Self {
        DualVector(vec![0.0; groups])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn lagrangian_of(report: &ErrorReport, lambda: &[f64], slack: f64) -> f64 {
    report.overall
        + report
            .per_group
            .iter()
            .zip(lambda)
            .map(|(e, l)| l * (e - slack))
            .sum::<f64>()
}

/// `l(h) + sum_g lambda_g (l_g(h) - slack)`.
pub fn lagrangian<H, C>(h: &H, lambda: &DualVector, slack: f64, data: &Dataset, cost: &C) -> Result<f64>
where
    C: BestResponse<H> + ?Sized,
{
    check_dim(data.num_groups(), lambda.0.len())?;
    let report = strategic_errors(h, data, cost)?;
    Ok(lagrangian_of(&report, &lambda.0, slack))
}

/// Gradient of the Lagrangian in `lambda`: `(l_g(h) - slack)_g`.
pub fn dual_gradient<H, C>(h: &H, slack: f64, data: &Dataset, cost: &C) -> Result<Vec<f64>>
where
    C: BestResponse<H> + ?Sized,
{
    let report = strategic_errors(h, data, cost)?;
    Ok(report.per_group.iter().map(|e| e - slack).collect())
}

/// Euclidean projection onto `{lambda >= 0, sum lambda <= bound}`.
///
/// When clipping negatives already lands inside the cap that is the answer;
/// otherwise the projection lies on the face `sum = bound` and equals
/// `max(z - theta, 0)` with `theta` found exactly by sorting.
pub fn project_capped_simplex(z: &[f64], bound: f64) -> Result<DualVector> {
    if !(bound > 0.0) || !bound.is_finite() {
        return Err(Error::invalid("projection bound must be positive and finite"));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("cannot project a non-finite vector"));
    }
    let clipped: Vec<f64> = z.iter().map(|&v| v.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= bound {
        return Ok(DualVector(clipped));
    }
    let mut sorted = clipped;
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        prefix += u;
        let candidate = (prefix - bound) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    Ok(DualVector(z.iter().map(|&v| (v - theta).max(0.0)).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedOutcome {
    pub model: RandomizedClassifier<LinearClassifier>,
    /// Estimated minmax value from the first phase.
    pub gamma_hat: f64,
    pub trace: RunTrace,
    pub iterations: usize,
    pub bound: f64,
    /// Oracle calls of the Lagrangian phase.
    pub oracle_calls: usize,
    /// Oracle calls spent estimating `gamma_hat` (0 when it was supplied).
    pub estimate_oracle_calls: usize,
    /// `max_{lambda in Lambda} sum_t L(h_t, lambda) - sum_t L(h_t, lambda_{t-1})`.
    pub dual_regret: f64,
    pub slack: f64,
}

impl ConstrainedOutcome {
    /// `B^2 sqrt(T) / 2 + G (sqrt(T) - 1/2)`.
    pub fn regret_bound(&self, num_groups: usize) -> f64 {
        let root = (self.iterations as f64).sqrt();
        self.bound * self.bound * root / 2.0 + num_groups as f64 * (root - 0.5)
    }

    /// Equilibrium slack `(B^2/2 + G) / sqrt(T)` implied by the regret bound.
    pub fn nu(&self, num_groups: usize) -> f64 {
        (self.bound * self.bound / 2.0 + num_groups as f64) / (self.iterations as f64).sqrt()
    }

    pub fn total_oracle_calls(&self) -> usize {
        self.oracle_calls + self.estimate_oracle_calls
    }
}

fn resolved_schedule(groups: usize, config: &ConstrainedRunConfig) -> Result<(usize, f64)> {
    let (derived_t, derived_b) = constrained_schedule(groups, config.epsilon);
    let rounds = config.iterations.map_or(derived_t, |t| t.max(1) as u64);
    if rounds > config.max_iterations as u64 {
        return Err(Error::IterationCap {
            required: rounds,
            cap: config.max_iterations as u64,
        });
    }
    Ok((rounds as usize, config.bound.unwrap_or(derived_b)))
}

/// Full two-phase solver: estimate `gamma_hat`, then run the Lagrangian game.
pub fn solve_constrained(
    data: &Dataset,
    cost: &L2BudgetCost,
    oracle: &OracleConfig,
    config: &ConstrainedRunConfig,
) -> Result<ConstrainedOutcome> {
    config.validate()?;
    data.require_nonempty_groups()?;
    // refuse before spending the estimation phase
    resolved_schedule(data.num_groups(), config)?;
    let estimate = solve_minimax(data, cost, oracle, &config.estimate_config())?;
    let gamma_hat = crate::eval::randomized_errors(&estimate.model, data, cost)?.max_group;
    let mut out = solve_constrained_with_estimate(data, cost, oracle, config, gamma_hat)?;
    out.estimate_oracle_calls = estimate.oracle_calls;
    Ok(out)
}

/// Lagrangian phase with a caller-supplied minmax estimate.
pub fn solve_constrained_with_estimate(
    data: &Dataset,
    cost: &L2BudgetCost,
    oracle: &OracleConfig,
    config: &ConstrainedRunConfig,
    gamma_hat: f64,
) -> Result<ConstrainedOutcome> {
    config.validate()?;
    data.require_nonempty_groups()?;
    oracle.validate()?;
    let groups = data.num_groups();
    let (rounds, bound) = resolved_schedule(groups, config)?;
    let slack = gamma_hat + config.gamma + config.epsilon;
    let fractions = data.group_fractions();

    let mut lambda = DualVector::zeros(groups);
    let mut support = Vec::with_capacity(rounds);
    let mut rows = Vec::with_capacity(rounds);
    let mut mixture = RunningMixture::new(groups);
    let mut realized = 0.0;
    let mut overall_sum = 0.0;
    let mut violation_sums = vec![0.0; groups];

    for t in 1..=rounds {
        let weights: Vec<f64> = lambda.0.iter().zip(&fractions).map(|(l, f)| l + f).collect();
        let h = werm(data, &GroupWeights(weights), cost, oracle)?;
        let report = strategic_errors(&h, data, cost)?;
        let value = lagrangian_of(&report, &lambda.0, slack);
        realized += value;
        overall_sum += report.overall;
        let gradient: Vec<f64> = report.per_group.iter().map(|e| e - slack).collect();
        for (acc, gval) in violation_sums.iter_mut().zip(&gradient) {
            *acc += gval;
        }

        let step = 1.0 / (t as f64).sqrt();
        let ascended: Vec<f64> = lambda.0.iter().zip(&gradient).map(|(l, gval)| l + step * gval).collect();
        lambda = project_capped_simplex(&ascended, bound)?;

        let running = mixture.push(&report.per_group);
        if config.log_every > 0 && t % config.log_every == 0 {
            log::debug!("constrained round {t}/{rounds}: running max-group error {running:.4}");
        }
        rows.push(TraceRow {
            iteration: t,
            lambda: lambda.0.clone(),
            group_errors: report.per_group,
            running_max_group_error: running,
            lagrangian: Some(value),
        });
        support.push(h);
    }

    // the best fixed dual play sits at a vertex of the capped simplex
    let worst = violation_sums.iter().copied().fold(0.0, f64::max);
    let best_fixed = overall_sum + bound * worst;
    Ok(ConstrainedOutcome {
        model: RandomizedClassifier::uniform(support)?,
        gamma_hat,
        trace: RunTrace { rows },
        iterations: rounds,
        bound,
        oracle_calls: rounds,
        estimate_oracle_calls: 0,
        dual_regret: best_fixed - realized,
        slack,
    })
}
