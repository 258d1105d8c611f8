//! Minimax-group-fair learning against strategic agents.
//!
//! Agents `(x, g, y)` manipulate their features at a group-dependent cost to
//! obtain a positive label. The learner wants a classifier whose *strategic*
//! error (error measured after every agent best-responds) is small for the
//! worst-off group, optionally while also keeping overall error low.
//!
//! The crate provides:
//!
//! * [`separable`]: an exact grid solver for scaled separable costs, where
//!   optimizing over per-group threshold classifiers is sufficient.
//! * [`minimax`]: exponential-weights no-regret dynamics against a weighted
//!   ERM oracle, yielding a randomized classifier with small max-group error.
//! * [`constrained`]: Lagrangian dynamics with projected gradient ascent on the
//!   duals, minimizing overall error subject to a max-group error constraint.
//! * [`oracle`]: the weighted ERM oracle (robust paired regression heuristic
//!   and an exact finite-pool oracle).
//! * [`baselines`], [`ingest`] and [`harness`]: the experiment pipeline.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::large_enum_variant)]

pub mod baselines;
pub mod constrained;
pub mod cost;
pub mod domain;
pub mod error;
pub mod eval;
pub mod harness;
pub mod ingest;
pub mod minimax;
pub mod oracle;
pub mod separable;

pub use cost::{best_response_linear, BestResponse, CostModel, L2BudgetCost, ScalarMap, ScaledSeparableCost};
pub use domain::{
    Agent, Dataset, ExtReal, GroupId, LinearClassifier, RandomizedClassifier, ThresholdClassifier,
};
pub use error::{Error, Result};
pub use eval::{randomized_errors, strategic_errors, ErrorReport};
