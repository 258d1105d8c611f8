//! Per-group manipulation costs and agent best responses.
//!
//! An agent `(x, g)` facing classifier `h` moves to the point `z` maximizing
//! `h(z) - c_g(x, z)`. Two cost families are supported:
//!
//! * [`L2BudgetCost`]: `c_g(x, z) = ||x - z||_2 / tau_g`, used with halfspaces.
//! * [`ScaledSeparableCost`]: `c_g(x, z) = k_g * max(b(z) - a(x), 0)`, used with
//!   the per-group threshold classifiers of the exact separable solver.

use serde::{Deserialize, Serialize};

use crate::domain::{Agent, Dataset, GroupId, LinearClassifier, ThresholdClassifier};
use crate::error::{check_dim, Error, Result};

/// Evaluates `c_g(x, z)`.
pub trait CostModel {
    fn num_groups(&self) -> usize;
    fn cost(&self, x: &[f64], z: &[f64], g: GroupId) -> Result<f64>;
}

/// Label that `h` assigns to an agent after the agent best-responds to `h`.
pub trait BestResponse<H> {
    fn num_groups(&self) -> usize;
    fn response_label(&self, agent: &Agent, h: &H) -> Result<bool>;
}

fn group_slot<T: Copy>(values: &[T], g: GroupId) -> Result<T> {
    values.get(g.0).copied().ok_or_else(|| {
        Error::invalid(format!(
            "group {g} out of range for a cost model with {} groups",
            values.len()
        ))
    })
}

/// `c_g(x, z) = ||x - z||_2 / tau_g`; `tau_g = 0` pins the agent in place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2BudgetCost {
    budgets: Vec<f64>,
}

impl L2BudgetCost {
    pub fn new(budgets: Vec<f64>) -> Result<Self> {
        if budgets.is_empty() {
            return Err(Error::invalid("need a budget for at least one group"));
        }
        if budgets.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
            return Err(Error::invalid("budgets must be finite and nonnegative"));
        }
        Ok(L2BudgetCost { budgets })
    }

    /// Non-strategic agents: nobody can move.
    pub fn zero(num_groups: usize) -> Self {
        L2BudgetCost {
            budgets: vec![0.0; num_groups.max(1)],
        }
    }

    /// Budget profile `tau * fractions`.
    pub fn from_profile(tau: f64, fractions: &[f64]) -> Result<Self> {
        Self::new(fractions.iter().map(|f| tau * f).collect())
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    pub fn budget(&self, g: GroupId) -> Result<f64> {
        group_slot(&self.budgets, g)
    }

    pub fn max_budget(&self) -> f64 {
        self.budgets.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.budgets.iter().all(|&t| t == self.budgets[0])
    }

    /// Agent-weighted mean budget over `data`.
    pub fn average_budget(&self, data: &Dataset) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::invalid("average budget of an empty dataset"));
        }
        let total = data
            .agents()
            .iter()
            .map(|a| self.budget(a.group))
            .sum::<Result<f64>>()?;
        Ok(total / data.len() as f64)
    }
}

impl CostModel for L2BudgetCost {
    fn num_groups(&self) -> usize {
        self.budgets.len()
    }

    fn cost(&self, x: &[f64], z: &[f64], g: GroupId) -> Result<f64> {
        check_dim(x.len(), z.len())?;
        let tau = self.budget(g)?;
        let dist = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if dist == 0.0 {
            Ok(0.0)
        } else if tau == 0.0 {
            Ok(f64::INFINITY)
        } else {
            Ok(dist / tau)
        }
    }
}

/// Whether an agent currently scored `score` reaches the positive region
/// with budget `tau`. Shared by the label-only and the full best response.
fn reaches_positive(h: &LinearClassifier, score: f64, tau: f64) -> bool {
    if score >= 0.0 {
        return true;
    }
    if h.is_constant() {
        return false;
    }
    // Distance to the closed positive region; ties manipulate.
    let gap = -score / h.norm();
    gap <= tau
}

/// Best response of agent `(x, g)` to halfspace `h` under an l2 budget cost.
///
/// Returns the manipulated point and the label it receives. Agents already
/// classified positive stay put; a negative agent moves distance exactly
/// `tau_g` along `w` when that reaches the positive region, and otherwise
/// stays put.
pub fn best_response_linear(
    x: &[f64],
    g: GroupId,
    h: &LinearClassifier,
    cost: &L2BudgetCost,
) -> Result<(Vec<f64>, bool)> {
    let score = h.score(x)?;
    let tau = cost.budget(g)?;
    if score >= 0.0 {
        return Ok((x.to_vec(), true));
    }
    if reaches_positive(h, score, tau) {
        let scale = tau / h.norm();
        let z = x.iter().zip(&h.weights).map(|(v, w)| v + scale * w).collect();
        Ok((z, true))
    } else {
        Ok((x.to_vec(), false))
    }
}

impl BestResponse<LinearClassifier> for L2BudgetCost {
    fn num_groups(&self) -> usize {
        self.budgets.len()
    }

    fn response_label(&self, agent: &Agent, h: &LinearClassifier) -> Result<bool> {
        let score = h.score(&agent.x)?;
        Ok(reaches_positive(h, score, self.budget(agent.group)?))
    }
}

/// Affine scalar feature map `x -> coef·x + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarMap {
    pub coef: Vec<f64>,
    #[serde(default)]
    pub offset: f64,
}

impl ScalarMap {
    /// The identity on one-dimensional features.
    pub fn identity() -> Self {
        ScalarMap {
            coef: vec![1.0],
            offset: 0.0,
        }
    }

    /// Projection onto feature `index` of a `dim`-dimensional space.
    pub fn coordinate(dim: usize, index: usize) -> Self {
        let mut coef = vec![0.0; dim];
        coef[index] = 1.0;
        ScalarMap { coef, offset: 0.0 }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.coef.len(), x.len())?;
        Ok(self.coef.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.offset)
    }
}

/// `c_g(x, z) = k_g * max(b(z) - a(x), 0)`.
///
/// Induces the separable pair `a_g = k_g * a`, `b_g = k_g * b`. When `b` has a
/// bounded range, `b_sup` caps the reachable score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledSeparableCost {
    scales: Vec<f64>,
    origin: ScalarMap,
    target: ScalarMap,
    target_sup: Option<f64>,
}

impl ScaledSeparableCost {
    pub fn new(
        scales: Vec<f64>,
        origin: ScalarMap,
        target: ScalarMap,
        target_sup: Option<f64>,
    ) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::invalid("need a cost scale for at least one group"));
        }
        if scales.iter().any(|&k| !(k > 0.0) || !k.is_finite()) {
            return Err(Error::invalid("cost scales k_g must be finite and positive"));
        }
        check_dim(origin.coef.len(), target.coef.len())?;
        if let Some(sup) = target_sup {
            if !sup.is_finite() {
                return Err(Error::invalid("b_sup must be finite when given"));
            }
        }
        Ok(ScaledSeparableCost {
            scales,
            origin,
            target,
            target_sup,
        })
    }

    /// `a = b = identity` on one-dimensional features.
    pub fn identity(scales: Vec<f64>) -> Result<Self> {
        Self::new(scales, ScalarMap::identity(), ScalarMap::identity(), None)
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn scale(&self, g: GroupId) -> Result<f64> {
        group_slot(&self.scales, g)
    }

    /// `b_g(x) = k_g * b(x)` for every group.
    pub fn group_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        let b = self.target.eval(x)?;
        Ok(self.scales.iter().map(|k| k * b).collect())
    }

    /// Checks that every `a(x_i)` in `data` is a representable `b` value.
    pub fn validate_on(&self, data: &Dataset) -> Result<()> {
        check_dim(self.origin.coef.len(), data.dim())?;
        if data.num_groups() != self.scales.len() {
            return Err(Error::invalid(format!(
                "cost model has {} groups, dataset has {}",
                self.scales.len(),
                data.num_groups()
            )));
        }
        if let Some(sup) = self.target_sup {
            for (i, agent) in data.agents().iter().enumerate() {
                let a = self.origin.eval(&agent.x)?;
                if a > sup {
                    return Err(Error::invalid(format!(
                        "agent {i}: a(x) = {a} exceeds sup b = {sup}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Supremum of `b_{g'}(z)` over the manipulation region
    /// `{z : c_g(x, z) < 1}` of an agent in group `g`, treated as attained.
    pub fn feasible_b_max(&self, x: &[f64], g: GroupId, g_prime: GroupId) -> Result<f64> {
        let reach = self.feasible_b_reach(x, g)?;
        Ok(self.scale(g_prime)? * reach)
    }

    /// Largest reachable `b(z)`: `a(x) + 1/k_g`, capped at `b_sup`.
    fn feasible_b_reach(&self, x: &[f64], g: GroupId) -> Result<f64> {
        let reach = self.origin.eval(x)? + 1.0 / self.scale(g)?;
        Ok(match self.target_sup {
            Some(sup) => reach.min(sup),
            None => reach,
        })
    }

    /// The vector `(t_{g'})_{g'}` of feasible maxima for one agent.
    pub fn feasible_maxima(&self, x: &[f64], g: GroupId) -> Result<Vec<f64>> {
        let reach = self.feasible_b_reach(x, g)?;
        Ok(self.scales.iter().map(|k| k * reach).collect())
    }
}

impl CostModel for ScaledSeparableCost {
    fn num_groups(&self) -> usize {
        self.scales.len()
    }

    fn cost(&self, x: &[f64], z: &[f64], g: GroupId) -> Result<f64> {
        check_dim(x.len(), z.len())?;
        let k = self.scale(g)?;
        let gap = self.target.eval(z)? - self.origin.eval(x)?;
        Ok(k * gap.max(0.0))
    }
}

impl BestResponse<ThresholdClassifier> for ScaledSeparableCost {
    fn num_groups(&self) -> usize {
        self.scales.len()
    }

    fn response_label(&self, agent: &Agent, f: &ThresholdClassifier) -> Result<bool> {
        let maxima = self.feasible_maxima(&agent.x, agent.group)?;
        f.classify_threshold(&maxima)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(w: Vec<f64>, b: f64) -> LinearClassifier {
        LinearClassifier::new(w, b).unwrap()
    }

    #[test]
    fn l2_cost_values() {
        let c = L2BudgetCost::new(vec![2.0]).unwrap();
        assert_eq!(c.cost(&[0.0, 0.0], &[1.0, 0.0], GroupId(0)).unwrap(), 0.5);
        let c1 = L2BudgetCost::new(vec![1.0]).unwrap();
        assert_eq!(c1.cost(&[3.0, 4.0], &[3.0, 4.0], GroupId(0)).unwrap(), 0.0);
        let frozen = L2BudgetCost::zero(1);
        assert_eq!(frozen.cost(&[0.0], &[0.0], GroupId(0)).unwrap(), 0.0);
        assert!(frozen.cost(&[0.0], &[1e-9], GroupId(0)).unwrap().is_infinite());
        assert!(c.cost(&[0.0], &[0.0, 1.0], GroupId(0)).is_err());
    }

    #[test]
    fn separable_cost_value() {
        let c = ScaledSeparableCost::identity(vec![2.0]).unwrap();
        let v = c.cost(&[0.0], &[0.3], GroupId(0)).unwrap();
        assert!((v - 0.6).abs() < 1e-12);
        // moving down is free
        assert_eq!(c.cost(&[0.0], &[-4.0], GroupId(0)).unwrap(), 0.0);
    }

    #[test]
    fn best_response_examples() {
        let cost = L2BudgetCost::new(vec![1.0]).unwrap();
        let clf = h(vec![1.0, 0.0], -1.0);
        let (z, y) = best_response_linear(&[0.0, 0.0], GroupId(0), &clf, &cost).unwrap();
        assert_eq!((z, y), (vec![1.0, 0.0], true));
        let (z, y) = best_response_linear(&[2.0, 0.0], GroupId(0), &clf, &cost).unwrap();
        assert_eq!((z, y), (vec![2.0, 0.0], true));
        let (z, y) = best_response_linear(&[-1.0, 0.0], GroupId(0), &clf, &cost).unwrap();
        assert_eq!((z, y), (vec![-1.0, 0.0], false));
    }

    #[test]
    fn constant_classifiers_never_induce_moves() {
        let cost = L2BudgetCost::new(vec![100.0]).unwrap();
        let neg = LinearClassifier::constant(1, false);
        let (z, y) = best_response_linear(&[0.0], GroupId(0), &neg, &cost).unwrap();
        assert_eq!((z, y), (vec![0.0], false));
    }

    #[test]
    fn best_response_agrees_with_label_only_path() {
        let cost = L2BudgetCost::new(vec![0.7, 0.0]).unwrap();
        let clf = h(vec![3.0, -4.0], 0.5);
        for i in -20..20 {
            for g in 0..2 {
                let x = [i as f64 * 0.1, 0.05 * i as f64];
                let agent = Agent::new(x.to_vec(), g, true);
                let (_, label) = best_response_linear(&x, GroupId(g), &clf, &cost).unwrap();
                assert_eq!(label, cost.response_label(&agent, &clf).unwrap());
            }
        }
    }

    #[test]
    fn feasible_b_max_examples() {
        let c = ScaledSeparableCost::identity(vec![1.0, 2.0]).unwrap();
        assert_eq!(c.feasible_b_max(&[0.0], GroupId(0), GroupId(0)).unwrap(), 1.0);
        assert_eq!(c.feasible_b_max(&[0.0], GroupId(0), GroupId(1)).unwrap(), 2.0);
        assert_eq!(c.feasible_b_max(&[0.0], GroupId(1), GroupId(0)).unwrap(), 0.5);
    }

    #[test]
    fn feasible_b_max_matches_grid_maximization() {
        // numeric sup of b_{g'}(z) over {z : c_g(x, z) < 1}
        let c = ScaledSeparableCost::identity(vec![1.0, 2.0]).unwrap();
        for (g, gp) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let mut best = f64::NEG_INFINITY;
            for i in 0..=40_000 {
                let z = -2.0 + i as f64 * 1e-4;
                if c.cost(&[0.0], &[z], GroupId(g)).unwrap() < 1.0 {
                    best = best.max(c.scales()[gp] * z);
                }
            }
            let exact = c.feasible_b_max(&[0.0], GroupId(g), GroupId(gp)).unwrap();
            assert!(exact >= best && exact - best < 1e-3, "{g},{gp}: {exact} vs {best}");
        }
    }

    #[test]
    fn bounded_target_caps_feasible_max() {
        let c = ScaledSeparableCost::new(
            vec![1.0],
            ScalarMap::identity(),
            ScalarMap::identity(),
            Some(0.5),
        )
        .unwrap();
        assert_eq!(c.feasible_b_max(&[0.0], GroupId(0), GroupId(0)).unwrap(), 0.5);
        let ds = Dataset::new(vec![Agent::new(vec![0.8], 0, true)], 1).unwrap();
        assert!(c.validate_on(&ds).is_err());
    }

    #[test]
    fn invalid_cost_parameters() {
        assert!(L2BudgetCost::new(vec![-1.0]).is_err());
        assert!(L2BudgetCost::new(vec![]).is_err());
        assert!(ScaledSeparableCost::identity(vec![0.0]).is_err());
        assert!(L2BudgetCost::new(vec![1.0]).unwrap().budget(GroupId(3)).is_err());
    }

    #[test]
    fn average_budget_is_agent_weighted() {
        let ds = Dataset::new(
            vec![
                Agent::new(vec![0.0], 0, true),
                Agent::new(vec![0.0], 0, true),
                Agent::new(vec![0.0], 0, true),
                Agent::new(vec![0.0], 1, true),
            ],
            2,
        )
        .unwrap();
        let c = L2BudgetCost::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(c.average_budget(&ds).unwrap(), 0.75);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn utility(cost: &L2BudgetCost, clf: &LinearClassifier, x: &[f64], z: &[f64]) -> f64 {
            let gain = if clf.classify(z).unwrap() { 1.0 } else { 0.0 };
            gain - cost.cost(x, z, GroupId(0)).unwrap()
        }

        proptest! {
            #[test]
            fn response_never_lowers_utility(
                w in prop::collection::vec(-3.0f64..3.0, 2),
                b in -3.0f64..3.0,
                x in prop::collection::vec(-3.0f64..3.0, 2),
                tau in 0.0f64..2.0,
            ) {
                prop_assume!(w.iter().any(|v| v.abs() > 1e-3));
                let clf = LinearClassifier::new(w, b).unwrap();
                let cost = L2BudgetCost::new(vec![tau]).unwrap();
                let (z, label) = best_response_linear(&x, GroupId(0), &clf, &cost).unwrap();
                let moved: f64 = x.iter().zip(&z).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
                prop_assert!(moved == 0.0 || (moved - tau).abs() < 1e-9);
                if moved > 0.0 {
                    prop_assert!(label);
                    // the mover pays exactly 1 for a gain of 1
                    prop_assert!(clf.score(&z).unwrap() >= -1e-9);
                } else {
                    prop_assert!(utility(&cost, &clf, &x, &z) >= utility(&cost, &clf, &x, &x));
                }
            }

            #[test]
            fn feasible_max_monotone_in_origin(a in -5.0f64..5.0, d in 0.0f64..5.0, k0 in 0.1f64..4.0, k1 in 0.1f64..4.0) {
                let c = ScaledSeparableCost::identity(vec![k0, k1]).unwrap();
                for g in 0..2 {
                    for gp in 0..2 {
                        let lo = c.feasible_b_max(&[a], GroupId(g), GroupId(gp)).unwrap();
                        let hi = c.feasible_b_max(&[a + d], GroupId(g), GroupId(gp)).unwrap();
                        prop_assert!(lo <= hi);
                    }
                }
            }
        }
    }
}
