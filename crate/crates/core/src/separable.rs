//! Exact empirical solver for scaled separable costs.
//!
//! Under a scaled separable cost every classifier's induced labeling of the
//! sample is reproduced by some per-group threshold classifier `f_t`. An
//! agent `i` ends up positive under `f_t` iff its feasible maxima satisfy
//! `t_g^i >= t_g` for every `g`, so only thresholds drawn from
//! `T_g(S) = {t_g^i} ∪ {+inf}` matter. Both objectives are solved by
//! enumerating the product grid `T(S) = prod_g T_g(S)`.
//!
//! Ties between grid points are broken towards the lexicographically smallest
//! threshold vector.

use serde::{Deserialize, Serialize};

use crate::cost::ScaledSeparableCost;
use crate::domain::{Dataset, ExtReal, ThresholdClassifier};
use crate::error::{Error, Result};
use crate::eval::ErrorReport;

/// Default cap on the number of grid points evaluated.
pub const DEFAULT_MAX_GRID_POINTS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparableConfig {
    pub max_grid_points: u64,
}

impl Default for SeparableConfig {
    fn default() -> Self {
        SeparableConfig {
            max_grid_points: DEFAULT_MAX_GRID_POINTS,
        }
    }
}

/// Candidate thresholds per group plus each agent's feasible maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGrid {
    /// `T_g(S)`: deduplicated, ascending, ending with `+inf`.
    pub per_group_candidates: Vec<Vec<ExtReal>>,
    /// `t^i = (t_g^i)_g` for every agent, in dataset order.
    pub agent_maxima: Vec<Vec<f64>>,
}

impl ThresholdGrid {
    pub fn num_groups(&self) -> usize {
        self.per_group_candidates.len()
    }

    /// `prod_g |T_g(S)|`, saturating.
    pub fn product_size(&self) -> u128 {
        self.per_group_candidates
            .iter()
            .fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128))
    }

    /// Smallest candidate `>= t_g` in every coordinate. Thresholds in the
    /// returned vector induce the same labeling of the sample as `t`.
    pub fn canonicalize(&self, t: &[f64]) -> Vec<ExtReal> {
        self.per_group_candidates
            .iter()
            .zip(t)
            .map(|(cands, &tg)| {
                cands
                    .iter()
                    .copied()
                    .find(|c| match c {
                        ExtReal::Finite(v) => *v >= tg,
                        ExtReal::PosInfinity => true,
                    })
                    .unwrap_or(ExtReal::PosInfinity)
            })
            .collect()
    }

    /// Per-group error counts of `f_t` using the indicator formula.
    pub fn error_counts(&self, data: &Dataset, t: &[ExtReal]) -> Vec<usize> {
        let mut errors = vec![0usize; data.num_groups()];
        for (agent, maxima) in data.agents().iter().zip(&self.agent_maxima) {
            let positive = t.iter().zip(maxima).all(|(tg, &m)| tg.passed_by(m));
            if positive != agent.label {
                errors[agent.group.0] += 1;
            }
        }
        errors
    }

    fn for_each_point(&self, mut visit: impl FnMut(&[ExtReal])) {
        let dims: Vec<usize> = self.per_group_candidates.iter().map(Vec::len).collect();
        let mut idx = vec![0usize; dims.len()];
        let mut point: Vec<ExtReal> = self.per_group_candidates.iter().map(|c| c[0]).collect();
        loop {
            visit(&point);
            // odometer with the first coordinate most significant
            let mut pos = dims.len();
            loop {
                if pos == 0 {
                    return;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < dims[pos] {
                    point[pos] = self.per_group_candidates[pos][idx[pos]];
                    break;
                }
                idx[pos] = 0;
                point[pos] = self.per_group_candidates[pos][0];
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableSolution {
    pub t_hat: ThresholdClassifier,
    pub report: ErrorReport,
    /// Minimum over the grid of the max-group error.
    pub minmax_value: f64,
    pub grid_points: u64,
}

pub fn build_threshold_grid(data: &Dataset, cost: &ScaledSeparableCost) -> Result<ThresholdGrid> {
    cost.validate_on(data)?;
    let groups = data.num_groups();
    let agent_maxima = data
        .agents()
        .iter()
        .map(|a| cost.feasible_maxima(&a.x, a.group))
        .collect::<Result<Vec<_>>>()?;
    let per_group_candidates = (0..groups)
        .map(|g| {
            let mut values: Vec<f64> = agent_maxima.iter().map(|m| m[g]).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            let mut cands: Vec<ExtReal> = values.into_iter().map(ExtReal::Finite).collect();
            cands.push(ExtReal::PosInfinity);
            cands
        })
        .collect();
    Ok(ThresholdGrid {
        per_group_candidates,
        agent_maxima,
    })
}

fn checked_grid(
    data: &Dataset,
    cost: &ScaledSeparableCost,
    config: &SeparableConfig,
) -> Result<ThresholdGrid> {
    data.require_nonempty_groups()?;
    let grid = build_threshold_grid(data, cost)?;
    let size = grid.product_size();
    if size > config.max_grid_points as u128 {
        return Err(Error::GridTooLarge {
            size,
            cap: config.max_grid_points,
        });
    }
    Ok(grid)
}

fn solution(grid: &ThresholdGrid, data: &Dataset, t: Vec<ExtReal>, minmax: f64) -> Result<SeparableSolution> {
    let report = ErrorReport::from_counts(&grid.error_counts(data, &t), data.group_counts());
    Ok(SeparableSolution {
        t_hat: ThresholdClassifier::new(t)?,
        report,
        minmax_value: minmax,
        grid_points: grid.product_size() as u64,
    })
}

fn grid_minmax(grid: &ThresholdGrid, data: &Dataset) -> (f64, Vec<ExtReal>) {
    let mut best: Option<(f64, Vec<ExtReal>)> = None;
    grid.for_each_point(|t| {
        let report = ErrorReport::from_counts(&grid.error_counts(data, t), data.group_counts());
        if best.as_ref().is_none_or(|(v, _)| report.max_group < *v) {
            best = Some((report.max_group, t.to_vec()));
        }
    });
    best.expect("grid always has at least one point")
}

/// Minimizes the max-group strategic error over `T(S)`.
pub fn solve_objective_1(
    data: &Dataset,
    cost: &ScaledSeparableCost,
    config: &SeparableConfig,
) -> Result<SeparableSolution> {
    let grid = checked_grid(data, cost, config)?;
    let (minmax, t) = grid_minmax(&grid, data);
    solution(&grid, data, t, minmax)
}

/// Minimizes overall error among grid points whose max-group error is within
/// `gamma + epsilon` of the grid minmax value.
pub fn solve_objective_2(
    data: &Dataset,
    cost: &ScaledSeparableCost,
    gamma: f64,
    epsilon: f64,
    config: &SeparableConfig,
) -> Result<SeparableSolution> {
    if !(gamma >= 0.0 && epsilon >= 0.0) {
        return Err(Error::invalid("gamma and epsilon must be nonnegative"));
    }
    let grid = checked_grid(data, cost, config)?;
    let (minmax, _) = grid_minmax(&grid, data);
    let ceiling = minmax + gamma + epsilon;
    let mut best: Option<(f64, Vec<ExtReal>)> = None;
    grid.for_each_point(|t| {
        let report = ErrorReport::from_counts(&grid.error_counts(data, t), data.group_counts());
        if report.max_group <= ceiling && best.as_ref().is_none_or(|(v, _)| report.overall < *v) {
            best = Some((report.overall, t.to_vec()));
        }
    });
    let (_, t) = best.expect("the minmax point is always feasible");
    solution(&grid, data, t, minmax)
}
