//! Minimax-fair learning by no-regret dynamics.
//!
//! The learner and a dual player play the zero-sum game
//! `min_p max_lambda sum_g lambda_g * l_g(p)`. Each round the learner best
//! responds to the current group weights through the WERM oracle and the dual
//! player updates its weights with exponential weights (multiplicative
//! updates on the group errors). The uniform mixture of the learner's
//! iterates approximates the minimax-fair randomized classifier.
//!
//! With `T = ceil(8 ln G / gamma^2)` rounds and `eta = sqrt(8 ln G / T)`, the
//! dual player's regret is at most `sqrt(T ln G / 2)`, so with an exact
//! oracle the mixture's max-group error is within `gamma` of optimal.

use serde::{Deserialize, Serialize};

use crate::cost::L2BudgetCost;
use crate::domain::{Dataset, LinearClassifier, RandomizedClassifier};
use crate::error::{Error, Result};
use crate::eval::strategic_errors;
use crate::oracle::{werm, GroupWeights, OracleConfig};

pub const DEFAULT_MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimaxRunConfig {
    pub gamma: f64,
    /// Replaces the derived iteration count when set.
    pub iterations: Option<usize>,
    pub max_iterations: usize,
    /// Emit a progress log line every this many rounds (0 disables).
    pub log_every: usize,
}

impl Default for MinimaxRunConfig {
    fn default() -> Self {
        MinimaxRunConfig {
            gamma: 0.1,
            iterations: None,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            log_every: 0,
        }
    }
}

impl MinimaxRunConfig {
    pub fn with_gamma(gamma: f64) -> Self {
        MinimaxRunConfig {
            gamma,
            ..Default::default()
        }
    }
}

/// Round count and step size. `ln` is the natural log; at least one round is
/// always played so that `G = 1` still calls the oracle.
pub fn minimax_schedule(num_groups: usize, gamma: f64, iterations: Option<usize>) -> Result<(u64, f64)> {
    if num_groups == 0 {
        return Err(Error::invalid("need at least one group"));
    }
    let ln_g = (num_groups as f64).ln();
    let rounds = match iterations {
        Some(t) => t.max(1) as u64,
        None => {
            if !(gamma > 0.0 && gamma <= 1.0) {
                return Err(Error::invalid("gamma must lie in (0, 1]"));
            }
            let raw = (8.0 * ln_g / (gamma * gamma)).ceil();
            if raw >= u64::MAX as f64 {
                u64::MAX
            } else {
                (raw as u64).max(1)
            }
        }
    };
    let eta = (8.0 * ln_g / rounds as f64).sqrt();
    Ok((rounds, eta))
}

/// One row per round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    /// Dual weights after the round's update.
    pub lambda: Vec<f64>,
    /// Group strategic errors of this round's classifier.
    pub group_errors: Vec<f64>,
    /// Max-group error of the uniform mixture of rounds `1..=iteration`.
    pub running_max_group_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Running sums of per-round group errors, for the mixture's trace column.
#[derive(Debug, Clone)]
pub(crate) struct RunningMixture {
    sums: Vec<f64>,
    rounds: usize,
}

impl RunningMixture {
    pub(crate) fn new(groups: usize) -> Self {
        RunningMixture {
            sums: vec![0.0; groups],
            rounds: 0,
        }
    }

    pub(crate) fn push(&mut self, errors: &[f64]) -> f64 {
        for (s, e) in self.sums.iter_mut().zip(errors) {
            *s += e;
        }
        self.rounds += 1;
        self.sums
            .iter()
            .map(|s| s / self.rounds as f64)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub(crate) fn sums(&self) -> &[f64] {
        &self.sums
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxOutcome {
    pub model: RandomizedClassifier<LinearClassifier>,
    pub trace: RunTrace,
    pub iterations: usize,
    pub eta: f64,
    pub oracle_calls: usize,
    /// `max_g sum_t l_g(h_t) - sum_t lambda_{t-1} · l(h_t)`.
    pub dual_regret: f64,
}

impl MinimaxOutcome {
    /// `sqrt(T ln G / 2)`.
    pub fn regret_bound(&self, num_groups: usize) -> f64 {
        (self.iterations as f64 * (num_groups as f64).ln() / 2.0).sqrt()
    }
}

fn softmax(log_weights: &[f64]) -> Vec<f64> {
    let top = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = log_weights.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / z).collect()
}

/// Exponential-weights dynamics against the WERM oracle.
pub fn solve_minimax(
    data: &Dataset,
    cost: &L2BudgetCost,
    oracle: &OracleConfig,
    config: &MinimaxRunConfig,
) -> Result<MinimaxOutcome> {
    data.require_nonempty_groups()?;
    oracle.validate()?;
    let groups = data.num_groups();
    let (rounds, eta) = minimax_schedule(groups, config.gamma, config.iterations)?;
    if rounds > config.max_iterations as u64 {
        return Err(Error::IterationCap {
            required: rounds,
            cap: config.max_iterations as u64,
        });
    }
    let rounds = rounds as usize;

    let mut log_weights = vec![0.0; groups];
    let mut lambda = vec![1.0 / groups as f64; groups];
    let mut support = Vec::with_capacity(rounds);
    let mut rows = Vec::with_capacity(rounds);
    let mut mixture = RunningMixture::new(groups);
    let mut realized = 0.0;

    for t in 1..=rounds {
        let h = werm(data, &GroupWeights(lambda.clone()), cost, oracle)?;
        let errors = strategic_errors(&h, data, cost)?.per_group;
        realized += lambda.iter().zip(&errors).map(|(l, e)| l * e).sum::<f64>();

        for (lw, e) in log_weights.iter_mut().zip(&errors) {
            *lw += eta * e;
        }
        lambda = softmax(&log_weights);

        let running = mixture.push(&errors);
        if config.log_every > 0 && t % config.log_every == 0 {
            log::debug!("minimax round {t}/{rounds}: running max-group error {running:.4}");
        }
        rows.push(TraceRow {
            iteration: t,
            lambda: lambda.clone(),
            group_errors: errors,
            running_max_group_error: running,
            lagrangian: None,
        });
        support.push(h);
    }

    let best_fixed = mixture.sums().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(MinimaxOutcome {
        model: RandomizedClassifier::uniform(support)?,
        trace: RunTrace { rows },
        iterations: rounds,
        eta,
        oracle_calls: rounds,
        dual_regret: best_fixed - realized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Agent;
    use crate::eval::randomized_errors;

    #[test]
    fn schedule_uses_natural_log() {
        let (t, eta) = minimax_schedule(2, 0.2, None).unwrap();
        assert_eq!(t, 139);
        assert!((eta - (8.0 * 2f64.ln() / 139.0).sqrt()).abs() < 1e-15);
        assert_eq!(minimax_schedule(2, 0.05, None).unwrap().0, 2219);
        assert_eq!(minimax_schedule(1, 0.1, None).unwrap(), (1, 0.0));
        assert_eq!(minimax_schedule(3, 0.1, Some(10)).unwrap().0, 10);
        assert!(minimax_schedule(2, 0.0, None).is_err());
    }

    #[test]
    fn softmax_is_stable_and_normalized() {
        let p = softmax(&[1000.0, 1000.0 + 2f64.ln()]);
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    fn small_two_group() -> Dataset {
        Dataset::new(
            vec![
                Agent::new(vec![-1.0, 0.2], 0, false),
                Agent::new(vec![1.0, -0.3], 0, true),
                Agent::new(vec![-0.4, 1.0], 1, true),
                Agent::new(vec![0.8, -1.0], 1, false),
                Agent::new(vec![0.1, 0.1], 1, true),
            ],
            2,
        )
        .unwrap()
    }

    #[test]
    fn iteration_cap_refuses_with_required_count() {
        let cfg = MinimaxRunConfig {
            gamma: 0.001,
            max_iterations: 1000,
            ..Default::default()
        };
        let err = solve_minimax(&small_two_group(), &L2BudgetCost::zero(2), &OracleConfig::default(), &cfg)
            .unwrap_err();
        match err {
            Error::IterationCap { required, cap } => {
                assert_eq!(required, (8.0 * 2f64.ln() / 1e-6).ceil() as u64);
                assert_eq!(cap, 1000);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_group_degenerates() {
        let ds = Dataset::new(
            vec![
                Agent::new(vec![-1.0], 0, false),
                Agent::new(vec![1.0], 0, true),
                Agent::new(vec![0.5], 0, false),
            ],
            1,
        )
        .unwrap();
        let pool = vec![
            LinearClassifier::new(vec![1.0], 0.0).unwrap(),
            LinearClassifier::new(vec![1.0], -0.75).unwrap(),
        ];
        let oracle = OracleConfig::exact_pool(pool.clone());
        let cfg = MinimaxRunConfig {
            iterations: Some(5),
            ..Default::default()
        };
        let out = solve_minimax(&ds, &L2BudgetCost::zero(1), &oracle, &cfg).unwrap();
        assert_eq!(out.oracle_calls, 5);
        assert!(out.trace.rows.iter().all(|r| r.lambda == vec![1.0]));
        assert!(out.model.support().iter().all(|h| *h == pool[1]));
        let r = randomized_errors(&out.model, &ds, &L2BudgetCost::zero(1)).unwrap();
        assert_eq!(r.max_group, 0.0);
        assert!(out.dual_regret.abs() < 1e-12);
    }

    #[test]
    fn trace_and_simplex_invariants() {
        let ds = small_two_group();
        let cost = L2BudgetCost::new(vec![0.3, 0.1]).unwrap();
        let cfg = MinimaxRunConfig::with_gamma(0.2);
        let out = solve_minimax(&ds, &cost, &OracleConfig::default(), &cfg).unwrap();
        assert_eq!(out.trace.len(), 139);
        assert_eq!(out.model.support().len(), 139);
        for row in &out.trace.rows {
            assert!(row.lambda.iter().all(|&l| l >= 0.0));
            assert!((row.lambda.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!(out.dual_regret <= out.regret_bound(2) + 1e-9);
        let last = out.trace.rows.last().unwrap().running_max_group_error;
        let r = randomized_errors(&out.model, &ds, &cost).unwrap();
        assert!((last - r.max_group).abs() < 1e-9);
    }

    #[test]
    fn deterministic_given_config() {
        let ds = small_two_group();
        let cost = L2BudgetCost::new(vec![0.3, 0.1]).unwrap();
        let cfg = MinimaxRunConfig::with_gamma(0.3);
        let a = solve_minimax(&ds, &cost, &OracleConfig::default(), &cfg).unwrap();
        let b = solve_minimax(&ds, &cost, &OracleConfig::default(), &cfg).unwrap();
        assert_eq!(a, b);
    }
}
