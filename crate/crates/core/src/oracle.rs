//! Weighted empirical risk minimization oracles over halfspaces.
//!
//! `werm(S, w)` returns a classifier minimizing `sum_g w_g * l_g(h)`, where
//! `l_g` is the strategic error of group `g`. Exact minimization over all
//! halfspaces is intractable, so two implementations are provided:
//!
//! * **Robust PRC**: fit a paired regression classifier on the weighted
//!   penalties, then shift it into its positive region by `rho * ||w||` and
//!   pick the best `rho` on a grid.
//! * **Exact pool**: exhaustive minimization over a fixed finite pool. Used
//!   to check the no-regret guarantees, which assume an exact oracle.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cost::L2BudgetCost;
use crate::domain::{Dataset, LinearClassifier};
use crate::error::{check_dim, Error, Result};
use crate::eval::strategic_errors;

/// Per-group weights handed to the oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupWeights(pub Vec<f64>);

impl GroupWeights {
    pub fn uniform(num_groups: usize) -> Self {
        GroupWeights(vec![1.0 / num_groups as f64; num_groups])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    #[default]
    RobustPrc,
    ExactPool,
}

/// Criterion used to pick the shift `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShiftSelection {
    /// Weighted objective `sum_g w_g l_g`, max-group error breaks ties.
    #[default]
    WeightedSum,
    /// Max-group error, weighted objective breaks ties.
    MaxGroup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub kind: OracleKind,
    pub shift_grid_points: usize,
    pub pool: Option<Vec<LinearClassifier>>,
    pub ridge: f64,
    pub shift_selection: ShiftSelection,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            kind: OracleKind::RobustPrc,
            shift_grid_points: 20,
            pool: None,
            ridge: 1e-8,
            shift_selection: ShiftSelection::WeightedSum,
        }
    }
}

impl OracleConfig {
    pub fn exact_pool(pool: Vec<LinearClassifier>) -> Self {
        OracleConfig {
            kind: OracleKind::ExactPool,
            pool: Some(pool),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shift_grid_points == 0 {
            return Err(Error::Config("shift_grid_points must be at least 1".into()));
        }
        if !(self.ridge >= 0.0) {
            return Err(Error::Config("ridge must be nonnegative".into()));
        }
        if self.kind == OracleKind::ExactPool && self.pool.as_ref().is_none_or(Vec::is_empty) {
            return Err(Error::Config("exact_pool oracle needs a non-empty pool".into()));
        }
        Ok(())
    }
}

/// Minimizes the weighted group strategic error.
pub fn werm(
    data: &Dataset,
    weights: &GroupWeights,
    cost: &L2BudgetCost,
    config: &OracleConfig,
) -> Result<LinearClassifier> {
    config.validate()?;
    data.require_nonempty_groups()?;
    check_dim(data.num_groups(), weights.0.len())?;
    match config.kind {
        OracleKind::ExactPool => {
            let pool = config.pool.as_deref().unwrap_or_default();
            exact_pool(data, weights, cost, pool)
        }
        OracleKind::RobustPrc => {
            let counts = data.group_counts();
            let sample_weights: Vec<f64> = data
                .agents()
                .iter()
                .map(|a| weights.0[a.group.0] / counts[a.group.0] as f64)
                .collect();
            let base = prc_fit(data, &sample_weights, config.ridge)?;
            let (grid_max, points) = if cost.is_homogeneous() {
                (cost.max_budget(), 1)
            } else {
                (cost.max_budget(), config.shift_grid_points)
            };
            let (_, h) = rho_grid_search(data, weights, cost, &base, grid_max, points, config.shift_selection)?;
            Ok(h)
        }
    }
}

fn exact_pool(
    data: &Dataset,
    weights: &GroupWeights,
    cost: &L2BudgetCost,
    pool: &[LinearClassifier],
) -> Result<LinearClassifier> {
    if weights.0.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::invalid("exact_pool oracle requires nonnegative group weights"));
    }
    let mut best: Option<(f64, &LinearClassifier)> = None;
    for h in pool {
        let value = strategic_errors(h, data, cost)?.weighted(&weights.0);
        if best.is_none_or(|(v, _)| value < v) {
            best = Some((value, h));
        }
    }
    best.map(|(_, h)| h.clone())
        .ok_or_else(|| Error::Config("exact_pool oracle needs a non-empty pool".into()))
}

/// Paired regression classifier with the penalty translation that leaves a
/// single regression: targets are `+w_i` for negatives and `-w_i` for
/// positives (the relative cost of predicting 1), fitted by ridge least
/// squares with an intercept. Predicts 1 where the fitted cost is `<= 0`.
pub fn prc_fit(data: &Dataset, sample_weights: &[f64], ridge: f64) -> Result<LinearClassifier> {
    check_dim(data.len(), sample_weights.len())?;
    if data.is_empty() {
        return Err(Error::invalid("cannot fit on an empty dataset"));
    }
    let d = data.dim();
    let cols = d + 1;
    let mut gram = DMatrix::<f64>::zeros(cols, cols);
    let mut rhs = DVector::<f64>::zeros(cols);
    let mut row = DVector::<f64>::zeros(cols);
    for (agent, &w) in data.agents().iter().zip(sample_weights) {
        row.rows_mut(0, d).copy_from_slice(&agent.x);
        row[d] = 1.0;
        let target = if agent.label { -w } else { w };
        gram.ger(1.0, &row, &row, 1.0);
        rhs.axpy(target, &row, 1.0);
    }
    for i in 0..cols {
        gram[(i, i)] += ridge;
    }
    let beta = match gram.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        None => gram
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::invalid("singular least-squares system; increase ridge"))?,
    };
    let weights: Vec<f64> = beta.rows(0, d).iter().map(|v| -v).collect();
    let bias = -beta[d];
    if weights.iter().all(|&w| w == 0.0) {
        return Ok(LinearClassifier::constant(d, bias >= 0.0));
    }
    LinearClassifier::new(weights, bias)
}

/// Moves the positive region back by distance `rho`: `b' = b - rho * ||w||`.
pub fn robust_shift(h: &LinearClassifier, rho: f64) -> LinearClassifier {
    LinearClassifier {
        weights: h.weights.clone(),
        bias: h.bias - rho * h.norm(),
    }
}

/// Candidate shifts: `{grid_max}` for a single point, else `points` equally
/// spaced values in `[0, grid_max]`.
pub fn shift_grid(grid_max: f64, points: usize) -> Vec<f64> {
    if points <= 1 || grid_max == 0.0 {
        return vec![grid_max];
    }
    let step = grid_max / (points - 1) as f64;
    (0..points)
        .map(|i| if i + 1 == points { grid_max } else { step * i as f64 })
        .collect()
}

/// Evaluates every shift on the grid and keeps the best; earlier (smaller)
/// shifts win exact ties.
pub fn rho_grid_search(
    data: &Dataset,
    weights: &GroupWeights,
    cost: &L2BudgetCost,
    h_base: &LinearClassifier,
    grid_max: f64,
    points: usize,
    selection: ShiftSelection,
) -> Result<(f64, LinearClassifier)> {
    if !(grid_max >= 0.0) || points == 0 {
        return Err(Error::invalid("shift grid needs grid_max >= 0 and at least one point"));
    }
    let mut best: Option<((f64, f64), f64, LinearClassifier)> = None;
    for rho in shift_grid(grid_max, points) {
        let h = robust_shift(h_base, rho);
        let report = strategic_errors(&h, data, cost)?;
        let weighted = report.weighted(&weights.0);
        let key = match selection {
            ShiftSelection::WeightedSum => (weighted, report.max_group),
            ShiftSelection::MaxGroup => (report.max_group, weighted),
        };
        let better = match &best {
            None => true,
            Some((k, _, _)) => key.0 < k.0 || (key.0 == k.0 && key.1 < k.1),
        };
        if better {
            best = Some((key, rho, h));
        }
    }
    let (_, rho, h) = best.expect("shift grid is never empty");
    Ok((rho, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Agent, GroupId};

    fn line(xs: &[(f64, bool)]) -> Dataset {
        Dataset::new(xs.iter().map(|&(x, y)| Agent::new(vec![x], 0, y)).collect(), 1).unwrap()
    }

    #[test]
    fn prc_two_point_closed_form() {
        // targets (+1, -1) at x = (-1, 1): r(x) = -x, predict 1 iff x >= 0
        let ds = line(&[(-1.0, false), (1.0, true)]);
        let h = prc_fit(&ds, &[1.0, 1.0], 1e-8).unwrap();
        assert!((h.weights[0] - 1.0).abs() < 1e-6);
        assert!(h.bias.abs() < 1e-6);
        assert!(h.classify(&[0.01]).unwrap());
        assert!(!h.classify(&[-0.01]).unwrap());
    }

    #[test]
    fn prc_all_positive_accepts_everyone() {
        let ds = line(&[(-3.0, true), (0.5, true), (2.0, true)]);
        let h = prc_fit(&ds, &[1.0, 1.0, 1.0], 1e-8).unwrap();
        for x in [-100.0, -3.0, 0.0, 7.0, 100.0] {
            assert!(h.classify(&[x]).unwrap());
        }
    }

    #[test]
    fn prc_zero_weight_row_enters_with_zero_target() {
        // the zero-weighted agent at x=3 still anchors the fit at target 0;
        // compare against the 3-point least squares closed form
        let ds = line(&[(-1.0, false), (1.0, true), (3.0, true)]);
        let h = prc_fit(&ds, &[1.0, 1.0, 0.0], 0.0).unwrap();
        let (xs, rs) = ([-1.0f64, 1.0, 3.0], [1.0f64, -1.0, 0.0]);
        let mx = xs.iter().sum::<f64>() / 3.0;
        let mr = rs.iter().sum::<f64>() / 3.0;
        let sxy: f64 = xs.iter().zip(&rs).map(|(x, r)| (x - mx) * (r - mr)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let slope = sxy / sxx;
        let icpt = mr - slope * mx;
        assert!((h.weights[0] + slope).abs() < 1e-9);
        assert!((h.bias + icpt).abs() < 1e-9);
    }

    #[test]
    fn prc_is_permutation_invariant() {
        let ds = Dataset::new(
            vec![
                Agent::new(vec![0.3, -1.0], 0, false),
                Agent::new(vec![1.2, 0.4], 1, true),
                Agent::new(vec![-0.7, 2.2], 0, true),
                Agent::new(vec![0.1, 0.1], 1, false),
            ],
            2,
        )
        .unwrap();
        let w = [0.5, 1.0, 0.25, 2.0];
        let a = prc_fit(&ds, &w, 1e-8).unwrap();
        let perm = [2, 0, 3, 1];
        let ds2 = ds.subset(&perm).unwrap();
        let w2: Vec<f64> = perm.iter().map(|&i| w[i]).collect();
        let b = prc_fit(&ds2, &w2, 1e-8).unwrap();
        for (x, y) in a.weights.iter().zip(&b.weights) {
            assert!((x - y).abs() < 1e-9);
        }
        assert!((a.bias - b.bias).abs() < 1e-9);
    }

    #[test]
    fn shift_examples() {
        let h = LinearClassifier::new(vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(robust_shift(&h, 1.0).bias, -1.0);
        assert_eq!(robust_shift(&h, 0.0), h);
        let h2 = LinearClassifier::new(vec![3.0, 4.0], 2.0).unwrap();
        assert!((robust_shift(&h2, 0.5).bias + 0.5).abs() < 1e-12);
    }

    #[test]
    fn shift_grid_endpoints() {
        assert_eq!(shift_grid(0.0, 20), vec![0.0]);
        assert_eq!(shift_grid(1.5, 1), vec![1.5]);
        let g = shift_grid(1.0, 5);
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn zero_grid_max_keeps_base() {
        let ds = line(&[(-1.0, false), (1.0, true)]);
        let h = LinearClassifier::new(vec![1.0], 0.0).unwrap();
        let (rho, out) = rho_grid_search(
            &ds,
            &GroupWeights::uniform(1),
            &L2BudgetCost::new(vec![0.5]).unwrap(),
            &h,
            0.0,
            20,
            ShiftSelection::WeightedSum,
        )
        .unwrap();
        assert_eq!(rho, 0.0);
        assert_eq!(out, h);
    }

    #[test]
    fn shift_beats_no_shift_when_negatives_crowd_boundary() {
        // negatives within tau of the boundary cross unless the boundary moves
        let ds = line(&[(-0.5, false), (-0.8, false), (-3.0, false), (2.0, true), (3.0, true)]);
        let cost = L2BudgetCost::new(vec![1.0]).unwrap();
        let h = LinearClassifier::new(vec![1.0], 0.0).unwrap();
        let w = GroupWeights::uniform(1);
        let at = |rho: f64| strategic_errors(&robust_shift(&h, rho), &ds, &cost).unwrap().overall;
        assert_eq!(at(0.0), 0.4);
        assert_eq!(at(1.0), 0.0);
        let (rho, _) = rho_grid_search(&ds, &w, &cost, &h, 1.0, 2, ShiftSelection::WeightedSum).unwrap();
        assert_eq!(rho, 1.0);
    }

    #[test]
    fn ties_prefer_smaller_shift() {
        let ds = line(&[(-5.0, false), (5.0, true)]);
        let cost = L2BudgetCost::new(vec![1.0]).unwrap();
        let h = LinearClassifier::new(vec![1.0], 0.0).unwrap();
        let (rho, _) = rho_grid_search(&ds, &GroupWeights::uniform(1), &cost, &h, 1.0, 5, ShiftSelection::WeightedSum)
            .unwrap();
        assert_eq!(rho, 0.0);
    }

    #[test]
    fn exact_pool_picks_minimum_and_first_on_ties() {
        let ds = line(&[(-1.0, false), (1.0, true), (2.0, true), (3.0, true), (-2.0, false)]);
        let cost = L2BudgetCost::zero(1);
        let good = LinearClassifier::new(vec![1.0], 0.0).unwrap();
        let bad = LinearClassifier::new(vec![1.0], -2.5).unwrap();
        let cfg = OracleConfig::exact_pool(vec![bad.clone(), good.clone()]);
        assert_eq!(werm(&ds, &GroupWeights::uniform(1), &cost, &cfg).unwrap(), good);
        let zero = GroupWeights(vec![0.0]);
        assert_eq!(werm(&ds, &zero, &cost, &cfg).unwrap(), bad);
        assert!(werm(&ds, &GroupWeights(vec![-1.0]), &cost, &cfg).is_err());
    }

    #[test]
    fn robust_prc_accepts_negative_weights() {
        let ds = Dataset::new(
            vec![
                Agent::new(vec![-1.0], 0, false),
                Agent::new(vec![1.0], 0, true),
                Agent::new(vec![-2.0], 1, false),
                Agent::new(vec![2.0], 1, true),
            ],
            2,
        )
        .unwrap();
        let h = werm(&ds, &GroupWeights(vec![1.0, -0.2]), &L2BudgetCost::zero(2), &OracleConfig::default());
        assert!(h.is_ok());
    }

    #[test]
    fn robust_prc_separates_wide_margin_data() {
        // margin 3 > 2 tau, equal budgets: rho = tau gives zero strategic error
        let mut agents = vec![];
        for g in 0..2 {
            for i in 0..10 {
                let off = i as f64 * 0.2;
                agents.push(Agent::new(vec![-3.0 - off], g, false));
                agents.push(Agent::new(vec![3.0 + off], g, true));
            }
        }
        let ds = Dataset::new(agents, 2).unwrap();
        let cost = L2BudgetCost::new(vec![1.0, 1.0]).unwrap();
        let h = werm(&ds, &GroupWeights::uniform(2), &cost, &OracleConfig::default()).unwrap();
        let r = strategic_errors(&h, &ds, &cost).unwrap();
        assert_eq!(r.weighted(&[0.5, 0.5]), 0.0);
        assert!(cost.budget(GroupId(0)).unwrap() == 1.0);
    }

    #[test]
    fn config_validation() {
        let bad = OracleConfig {
            shift_grid_points: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let empty_pool = OracleConfig::exact_pool(vec![]);
        assert!(empty_pool.validate().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn shifts_compose_additively(w in prop::collection::vec(-5.0f64..5.0, 3), b in -5.0f64..5.0, r1 in 0.0f64..3.0, r2 in 0.0f64..3.0) {
                prop_assume!(w.iter().any(|v| v.abs() > 1e-6));
                let h = LinearClassifier::new(w, b).unwrap();
                let twice = robust_shift(&robust_shift(&h, r1), r2);
                let once = robust_shift(&h, r1 + r2);
                prop_assert!((twice.bias - once.bias).abs() < 1e-9);
                prop_assert_eq!(twice.weights, once.weights);
            }

            #[test]
            fn grid_search_dominates_endpoints(
                xs in prop::collection::vec((-3.0f64..3.0, any::<bool>(), 0usize..2), 4..20),
                t0 in 0.0f64..1.5, t1 in 0.0f64..1.5, lam in 0.0f64..1.0,
            ) {
                let mut agents: Vec<Agent> = xs.iter().map(|&(x, y, g)| Agent::new(vec![x], g, y)).collect();
                agents.push(Agent::new(vec![0.0], 0, true));
                agents.push(Agent::new(vec![0.0], 1, false));
                let ds = Dataset::new(agents, 2).unwrap();
                let cost = L2BudgetCost::new(vec![t0, t1]).unwrap();
                let weights = GroupWeights(vec![lam, 1.0 - lam]);
                let cfg = OracleConfig::default();
                let counts = ds.group_counts();
                let sw: Vec<f64> = ds.agents().iter().map(|a| weights.0[a.group.0] / counts[a.group.0] as f64).collect();
                let base = prc_fit(&ds, &sw, cfg.ridge).unwrap();
                let chosen = werm(&ds, &weights, &cost, &cfg).unwrap();
                let obj = |h: &LinearClassifier| strategic_errors(h, &ds, &cost).unwrap().weighted(&weights.0);
                let full = robust_shift(&base, cost.max_budget());
                prop_assert!(obj(&chosen) <= obj(&base).max(obj(&full)) + 1e-12);
                prop_assert!(obj(&chosen) <= obj(&full) + 1e-12);
            }
        }
    }
}
