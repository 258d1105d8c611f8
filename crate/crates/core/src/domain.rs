//! Datasets, classifiers and group bookkeeping shared by every solver.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Index of a population group in `[0, G)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupId(pub usize);

impl GroupId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One agent: true (pre-manipulation) features, group and binary label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub x: Vec<f64>,
    pub group: GroupId,
    pub label: bool,
}

impl Agent {
    pub fn new(x: Vec<f64>, group: usize, label: bool) -> Self {
        Agent {
            x,
            group: GroupId(group),
            label,
        }
    }
}

/// A finite, ordered sample of agents partitioned into `G` disjoint groups.
///
/// Groups may be empty at construction; solvers and evaluators call
/// [`Dataset::require_nonempty_groups`] before dividing by group sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    agents: Vec<Agent>,
    group_counts: Vec<usize>,
    dim: usize,
}

impl Dataset {
    pub fn new(agents: Vec<Agent>, num_groups: usize) -> Result<Self> {
        if num_groups == 0 {
            return Err(Error::invalid("a dataset needs at least one group"));
        }
        let dim = agents.first().map_or(0, |a| a.x.len());
        let mut group_counts = vec![0usize; num_groups];
        for (i, agent) in agents.iter().enumerate() {
            check_dim(dim, agent.x.len())?;
            if agent.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("agent {i} has a non-finite feature")));
            }
            let slot = group_counts.get_mut(agent.group.0).ok_or_else(|| {
                Error::invalid(format!(
                    "agent {i} has group {} but the dataset declares {num_groups} groups",
                    agent.group
                ))
            })?;
            *slot += 1;
        }
        Ok(Dataset {
            agents,
            group_counts,
            dim,
        })
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_groups(&self) -> usize {
        self.group_counts.len()
    }

    pub fn group_counts(&self) -> &[usize] {
        &self.group_counts
    }

    /// `n_g / n` for every group.
    pub fn group_fractions(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.group_counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn require_nonempty_groups(&self) -> Result<()> {
        match self.group_counts.iter().position(|&c| c == 0) {
            Some(g) => Err(Error::EmptyGroup(GroupId(g))),
            None => Ok(()),
        }
    }

    /// New dataset holding the agents at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let agents = indices
            .iter()
            .map(|&i| {
                self.agents
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::invalid(format!("index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(agents, self.num_groups())
    }

    pub fn map_features(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Dataset> {
        let agents = self
            .agents
            .iter()
            .map(|a| Agent {
                x: f(&a.x),
                group: a.group,
                label: a.label,
            })
            .collect();
        Dataset::new(agents, self.num_groups())
    }
}

/// Halfspace `h(x) = 1[w·x + b >= 0]`.
///
/// A classifier with `w = 0` is a constant classifier and can only be built
/// through [`LinearClassifier::constant`] (or returned by a fit that produced
/// an exactly flat regression).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifier {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearClassifier {
    pub fn new(weights: Vec<f64>, bias: f64) -> Result<Self> {
        if weights.iter().chain(std::iter::once(&bias)).any(|v| !v.is_finite()) {
            return Err(Error::invalid("classifier parameters must be finite"));
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::invalid(
                "zero weight vector; use LinearClassifier::constant for constant classifiers",
            ));
        }
        Ok(LinearClassifier { weights, bias })
    }

    /// Classifier that labels every point `label`.
    pub fn constant(dim: usize, label: bool) -> Self {
        LinearClassifier {
            weights: vec![0.0; dim],
            bias: if label { 0.0 } else { -1.0 },
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn is_constant(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// `w·x + b`.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.score_unchecked(x))
    }

    pub(crate) fn score_unchecked(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    /// Label of `x`; points on the boundary are positive.
    pub fn classify(&self, x: &[f64]) -> Result<bool> {
        Ok(self.score(x)? >= 0.0)
    }
}

/// Extended real used for thresholds: a finite value or `+inf`.
///
/// `PosInfinity` is an exact sentinel: no finite value is `>=` it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtReal {
    Finite(f64),
    PosInfinity,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// Whether a finite `value` clears this threshold.
    pub fn passed_by(self, value: f64) -> bool {
        match self {
            ExtReal::Finite(t) => value >= t,
            ExtReal::PosInfinity => false,
        }
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.total_cmp(b),
            (ExtReal::Finite(_), ExtReal::PosInfinity) => Ordering::Less,
            (ExtReal::PosInfinity, ExtReal::Finite(_)) => Ordering::Greater,
            (ExtReal::PosInfinity, ExtReal::PosInfinity) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInfinity => write!(f, "inf"),
        }
    }
}

/// `f_t(x) = prod_g 1[b_g(x) >= t_g]` over the per-group score maps `b_g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdClassifier {
    pub thresholds: Vec<ExtReal>,
}

impl ThresholdClassifier {
    pub fn new(thresholds: Vec<ExtReal>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::invalid("threshold classifier needs at least one group"));
        }
        if thresholds
            .iter()
            .any(|t| matches!(t, ExtReal::Finite(v) if !v.is_finite()))
        {
            return Err(Error::invalid("finite thresholds must be finite"));
        }
        Ok(ThresholdClassifier { thresholds })
    }

    pub fn num_groups(&self) -> usize {
        self.thresholds.len()
    }

    /// Label given the `G` score values `b_g(x)`.
    pub fn classify_threshold(&self, b_values: &[f64]) -> Result<bool> {
        check_dim(self.num_groups(), b_values.len())?;
        Ok(self
            .thresholds
            .iter()
            .zip(b_values)
            .all(|(t, &b)| t.passed_by(b)))
    }
}

/// Finite-support distribution over classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizedClassifier<H> {
    support: Vec<H>,
    weights: Vec<f64>,
}

impl<H> RandomizedClassifier<H> {
    pub fn new(support: Vec<H>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid("randomized classifier needs a non-empty support"));
        }
        check_dim(support.len(), weights.len())?;
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("mixture weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(RandomizedClassifier { support, weights })
    }

    /// Uniform distribution over `support`.
    pub fn uniform(support: Vec<H>) -> Result<Self> {
        let w = 1.0 / support.len().max(1) as f64;
        let weights = vec![w; support.len()];
        Self::new(support, weights)
    }

    pub fn point_mass(h: H) -> Self {
        RandomizedClassifier {
            support: vec![h],
            weights: vec![1.0],
        }
    }

    pub fn support(&self) -> &[H] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&H, f64)> {
        self.support.iter().zip(self.weights.iter().copied())
    }

    pub fn map<K>(self, f: impl FnMut(H) -> K) -> RandomizedClassifier<K> {
        RandomizedClassifier {
            support: self.support.into_iter().map(f).collect(),
            weights: self.weights,
        }
    }

    pub fn into_parts(self) -> (Vec<H>, Vec<f64>) {
        (self.support, self.weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_ties_go_positive() {
        let h = LinearClassifier::new(vec![1.0, 0.0], -1.0).unwrap();
        assert!(h.classify(&[1.0, 0.0]).unwrap());
        assert!(!h.classify(&[0.0, 0.0]).unwrap());
    }

    #[test]
    fn classify_evaluates_affine_score() {
        // 2(0.1) - 0.9 + 0.5 = -0.2
        let h = LinearClassifier::new(vec![2.0, -1.0], 0.5).unwrap();
        assert!((h.score(&[0.1, 0.9]).unwrap() + 0.2).abs() < 1e-12);
        assert!(!h.classify(&[0.1, 0.9]).unwrap());
    }

    #[test]
    fn classify_rejects_dimension_mismatch() {
        let h = LinearClassifier::new(vec![1.0, 0.0], 0.0).unwrap();
        assert!(matches!(
            h.classify(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn zero_weights_need_explicit_constant() {
        assert!(LinearClassifier::new(vec![0.0, 0.0], 1.0).is_err());
        let pos = LinearClassifier::constant(2, true);
        let neg = LinearClassifier::constant(2, false);
        assert!(pos.is_constant());
        assert!(pos.classify(&[-5.0, 3.0]).unwrap());
        assert!(!neg.classify(&[5.0, 3.0]).unwrap());
    }

    #[test]
    fn threshold_classification() {
        let f = ThresholdClassifier::new(vec![ExtReal::Finite(1.0), ExtReal::Finite(3.0)]).unwrap();
        assert!(f.classify_threshold(&[3.0, 3.0]).unwrap());
        assert!(!f.classify_threshold(&[1.0, 1.0]).unwrap());
        let never = ThresholdClassifier::new(vec![ExtReal::PosInfinity, ExtReal::Finite(0.0)]).unwrap();
        assert!(!never.classify_threshold(&[1e300, 1e300]).unwrap());
        assert!(f.classify_threshold(&[1.0]).is_err());
    }

    #[test]
    fn dataset_counts_groups_and_validates() {
        let ds = Dataset::new(
            vec![
                Agent::new(vec![0.0], 0, false),
                Agent::new(vec![1.0], 1, true),
                Agent::new(vec![2.0], 1, true),
            ],
            3,
        )
        .unwrap();
        assert_eq!(ds.group_counts(), &[1, 2, 0]);
        assert!(matches!(ds.require_nonempty_groups(), Err(Error::EmptyGroup(GroupId(2)))));
        assert!(Dataset::new(vec![Agent::new(vec![0.0], 4, true)], 2).is_err());
        assert!(Dataset::new(
            vec![Agent::new(vec![0.0], 0, true), Agent::new(vec![0.0, 1.0], 0, true)],
            1
        )
        .is_err());
    }

    #[test]
    fn randomized_classifier_validates_weights() {
        assert!(RandomizedClassifier::new(vec![1, 2], vec![0.5, 0.4]).is_err());
        assert!(RandomizedClassifier::new(vec![1, 2], vec![1.5, -0.5]).is_err());
        assert!(RandomizedClassifier::<i32>::uniform(vec![]).is_err());
        let p = RandomizedClassifier::uniform(vec![1, 2, 3]).unwrap();
        assert!((p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ext_real_ordering() {
        let mut v = vec![ExtReal::PosInfinity, ExtReal::Finite(2.0), ExtReal::Finite(-1.0)];
        v.sort_by(ExtReal::total_cmp);
        assert_eq!(v, vec![ExtReal::Finite(-1.0), ExtReal::Finite(2.0), ExtReal::PosInfinity]);
    }
}
