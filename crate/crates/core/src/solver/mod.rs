//! Exact optimization of integer linear models.
//!
//! [`solve`] runs the built-in depth-first branch-and-bound; [`brute_force`]
//! enumerates every integral assignment and serves as the test oracle. Other
//! backends can be plugged in through [`Backend`].

mod bnb;
mod bound;
mod brute;
mod propagate;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Assignment, Model, ModelError};
use crate::rational::{self, JsonRational, Rational};

pub use bnb::BranchAndBound;
pub use bound::optimistic_bound;
pub use brute::{brute_force, BRUTE_FORCE_BUDGET};
pub use propagate::{propagate_bounds, Bounds, Propagation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("model too large for exhaustive enumeration: {0} integer variables (budget {BRUTE_FORCE_BUDGET})")]
    TooLarge(usize),
    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchingRule {
    /// Solution variables first, then by decreasing |objective coefficient|,
    /// ties broken by lowest variable id.
    #[default]
    SolutionFirst,
    /// Decreasing |objective coefficient| over all integer variables, ties by
    /// lowest variable id.
    MaxObjective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveParams {
    /// Seconds.
    pub time_limit: f64,
    pub node_limit: Option<u64>,
    pub branching: BranchingRule,
    /// Reserved for randomized backends; the built-in solver ignores it.
    pub seed: u64,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams { time_limit: 60.0, node_limit: None, branching: BranchingRule::default(), seed: 0 }
    }
}

impl SolveParams {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.time_limit.is_nan() || self.time_limit <= 0.0 {
            return Err(SolveError::InvalidParams("time_limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    TimedOut,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub fixings: u64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub assignment: Option<Assignment>,
    /// Objective in the model's native sense.
    pub objective: Option<Rational>,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn report(&self, model: &Model) -> SolutionReport {
        SolutionReport {
            status: self.status,
            objective: self.objective.map(JsonRational),
            assignment: self.assignment.as_ref().map(|a| a.to_named(model)),
            stats: self.stats.clone(),
        }
    }
}

/// Name-keyed JSON mirror of a [`SolveResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub status: SolveStatus,
    pub objective: Option<JsonRational>,
    pub assignment: Option<IndexMap<String, JsonRational>>,
    #[serde(default)]
    pub stats: SolveStats,
}

impl SolutionReport {
    pub fn into_result(self, model: &Model) -> Result<SolveResult, ModelError> {
        let assignment = self.assignment.as_ref().map(|a| Assignment::from_named(model, a)).transpose()?;
        Ok(SolveResult { status: self.status, assignment, objective: self.objective.map(|o| o.0), stats: self.stats })
    }

    pub fn objective_text(&self) -> Option<String> {
        self.objective.map(|o| rational::format_rational(&o.0))
    }
}

/// A solver implementation honoring the [`solve`] contract.
pub trait Backend {
    fn solve(&self, model: &Model, params: &SolveParams) -> Result<SolveResult, SolveError>;
}

pub fn solve(model: &Model, params: &SolveParams) -> Result<SolveResult, SolveError> {
    BranchAndBound.solve(model, params)
}
