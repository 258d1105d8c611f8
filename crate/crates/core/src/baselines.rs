//! Comparison learners that ignore or crudely approximate manipulation.
//!
//! The non-strategic learner trains with every budget set to zero. The naive
//! strategic learner takes that model and shifts every support classifier by
//! the agent-weighted average budget of the training set.

use serde::{Deserialize, Serialize};

use crate::constrained::{solve_constrained, ConstrainedRunConfig};
use crate::cost::L2BudgetCost;
use crate::domain::{Dataset, LinearClassifier, RandomizedClassifier};
use crate::error::Result;
use crate::minimax::{solve_minimax, MinimaxRunConfig};
use crate::oracle::{robust_shift, OracleConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    NonStrategic,
    NaiveStrategic,
}

/// Which solver a baseline wraps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingObjective {
    Minimax(MinimaxRunConfig),
    Constrained(ConstrainedRunConfig),
}

/// A trained baseline plus the oracle calls spent on it.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel {
    pub model: RandomizedClassifier<LinearClassifier>,
    pub oracle_calls: usize,
    /// Shift applied to each support classifier after training.
    pub shift: f64,
}

/// Trains as if agents could not move.
pub fn train_non_strategic(
    data: &Dataset,
    objective: &TrainingObjective,
    oracle: &OracleConfig,
) -> Result<BaselineModel> {
    let frozen = L2BudgetCost::zero(data.num_groups());
    let (model, oracle_calls) = match objective {
        TrainingObjective::Minimax(cfg) => {
            let out = solve_minimax(data, &frozen, oracle, cfg)?;
            (out.model, out.oracle_calls)
        }
        TrainingObjective::Constrained(cfg) => {
            let out = solve_constrained(data, &frozen, oracle, cfg)?;
            let calls = out.total_oracle_calls();
            (out.model, calls)
        }
    };
    Ok(BaselineModel {
        model,
        oracle_calls,
        shift: 0.0,
    })
}

/// Non-strategic training followed by a uniform shift of `tau_avg`.
pub fn train_naive_strategic(
    data: &Dataset,
    objective: &TrainingObjective,
    oracle: &OracleConfig,
    cost: &L2BudgetCost,
) -> Result<BaselineModel> {
    let tau_avg = cost.average_budget(data)?;
    let base = train_non_strategic(data, objective, oracle)?;
    Ok(BaselineModel {
        model: base.model.map(|h| robust_shift(&h, tau_avg)),
        oracle_calls: base.oracle_calls,
        shift: tau_avg,
    })
}

pub fn train_baseline(
    kind: BaselineKind,
    data: &Dataset,
    objective: &TrainingObjective,
    oracle: &OracleConfig,
    cost: &L2BudgetCost,
) -> Result<BaselineModel> {
    match kind {
        BaselineKind::NonStrategic => train_non_strategic(data, objective, oracle),
        BaselineKind::NaiveStrategic => train_naive_strategic(data, objective, oracle, cost),
    }
}
