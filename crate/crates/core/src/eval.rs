//! Empirical strategic error rates.
//!
//! Errors are counted per group as integers after every agent best-responds,
//! then divided once. Randomized classifiers use the transparent semantics:
//! agents respond to the drawn classifier, so the error of a mixture is the
//! weighted average of the errors of its support.

use serde::{Deserialize, Serialize};

use crate::cost::BestResponse;
use crate::domain::{Dataset, RandomizedClassifier};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub overall: f64,
    pub per_group: Vec<f64>,
    pub max_group: f64,
}

impl ErrorReport {
    /// Build from per-group error counts and group sizes (all sizes >= 1).
    pub fn from_counts(errors: &[usize], counts: &[usize]) -> Self {
        let n: usize = counts.iter().sum();
        let total: usize = errors.iter().sum();
        let per_group: Vec<f64> = errors
            .iter()
            .zip(counts)
            .map(|(&e, &c)| e as f64 / c as f64)
            .collect();
        let max_group = max_of(&per_group);
        ErrorReport {
            overall: total as f64 / n as f64,
            per_group,
            max_group,
        }
    }

    /// Mixes reports with the given nonnegative coefficients (summing to 1).
    pub fn mix<'a>(items: impl IntoIterator<Item = (&'a ErrorReport, f64)>) -> Result<Self> {
        let mut overall = 0.0;
        let mut per_group: Vec<f64> = Vec::new();
        let mut any = false;
        for (report, weight) in items {
            if !any {
                per_group = vec![0.0; report.per_group.len()];
                any = true;
            }
            if report.per_group.len() != per_group.len() {
                return Err(Error::DimensionMismatch {
                    expected: per_group.len(),
                    found: report.per_group.len(),
                });
            }
            overall += weight * report.overall;
            for (acc, e) in per_group.iter_mut().zip(&report.per_group) {
                *acc += weight * e;
            }
        }
        if !any {
            return Err(Error::invalid("cannot mix an empty set of reports"));
        }
        let max_group = max_of(&per_group);
        Ok(ErrorReport {
            overall,
            per_group,
            max_group,
        })
    }

    pub fn num_groups(&self) -> usize {
        self.per_group.len()
    }

    /// `sum_g w_g * l_g`.
    pub fn weighted(&self, weights: &[f64]) -> f64 {
        self.per_group.iter().zip(weights).map(|(e, w)| e * w).sum()
    }
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Per-group counts of agents misclassified after best response.
pub fn error_counts<H, C>(h: &H, data: &Dataset, cost: &C) -> Result<Vec<usize>>
where
    C: BestResponse<H> + ?Sized,
{
    if cost.num_groups() != data.num_groups() {
        return Err(Error::invalid(format!(
            "cost model has {} groups, dataset has {}",
            cost.num_groups(),
            data.num_groups()
        )));
    }
    let mut errors = vec![0usize; data.num_groups()];
    for agent in data.agents() {
        if cost.response_label(agent, h)? != agent.label {
            errors[agent.group.0] += 1;
        }
    }
    Ok(errors)
}

/// Strategic error rates of a single classifier on `data`.
pub fn strategic_errors<H, C>(h: &H, data: &Dataset, cost: &C) -> Result<ErrorReport>
where
    C: BestResponse<H> + ?Sized,
{
    data.require_nonempty_groups()?;
    let errors = error_counts(h, data, cost)?;
    Ok(ErrorReport::from_counts(&errors, data.group_counts()))
}

/// Strategic error rates of a mixture under the transparent model.
pub fn randomized_errors<H, C>(
    p: &RandomizedClassifier<H>,
    data: &Dataset,
    cost: &C,
) -> Result<ErrorReport>
where
    C: BestResponse<H> + ?Sized,
{
    let reports = p
        .support()
        .iter()
        .map(|h| strategic_errors(h, data, cost))
        .collect::<Result<Vec<_>>>()?;
    ErrorReport::mix(reports.iter().zip(p.weights().iter().copied()))
}
