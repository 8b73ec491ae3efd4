//! Contrastive explanations from an original solution and a hypothetical one.

use indexmap::IndexMap;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Assignment, Model, ModelError, Sense};
use crate::rational::{self, Rational};

pub mod render;

pub use render::{render_explanation, AgentColumn, RenderTemplate, RenderedExplanation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExplainError {
    #[error("assignments cover different variable sets ({left} vs {right} values)")]
    MismatchedVariableSets { left: usize, right: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Solution variables whose value went up (`increases`) or down (`decreases`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChangeSet {
    pub increases: Vec<usize>,
    pub decreases: Vec<usize>,
}

impl ChangeSet {
    pub fn len(&self) -> usize {
        self.increases.len() + self.decreases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn compute_changes(model: &Model, s: &Assignment, s_prime: &Assignment) -> Result<ChangeSet, ExplainError> {
    if s.len() != s_prime.len() || s.len() != model.num_vars() {
        return Err(ExplainError::MismatchedVariableSets { left: s.len(), right: s_prime.len() });
    }
    let mut changes = ChangeSet::default();
    for var in model.solution_vars() {
        let (before, after) = (s.get(var.id), s_prime.get(var.id));
        if after > before {
            changes.increases.push(var.id);
        } else if after < before {
            changes.decreases.push(var.id);
        }
    }
    Ok(changes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Maximization, hypothetical is worse.
    Loss,
    /// Maximization, hypothetical is better.
    Gain,
    /// Minimization, hypothetical costs more.
    Increase,
    /// Minimization, hypothetical costs less.
    Decrease,
    Unchanged,
}

impl Direction {
    pub fn of(sense: Sense, quality_diff: &Rational) -> Self {
        match (sense, quality_diff.signum()) {
            (_, s) if s.is_zero() => Direction::Unchanged,
            (Sense::Maximize, s) if s.is_positive() => Direction::Loss,
            (Sense::Maximize, _) => Direction::Gain,
            (Sense::Minimize, s) if s.is_negative() => Direction::Increase,
            (Sense::Minimize, _) => Direction::Decrease,
        }
    }

    /// "loss of 2 utility units" style phrase.
    pub fn phrase(&self, quality_diff: &Rational, unit: &str) -> String {
        let amount = rational::format_rational(&quality_diff.abs());
        match self {
            Direction::Loss => format!("loss of {amount} {unit} units"),
            Direction::Gain => format!("gain of {amount} {unit} units"),
            Direction::Increase => format!("increase of {amount} {unit} units"),
            Direction::Decrease => format!("decrease of {amount} {unit} units"),
            Direction::Unchanged => format!("no change in {unit}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractExplanation {
    /// q(f(x)) − q(f(x′)), native sense.
    #[serde(with = "rational")]
    pub quality_diff: Rational,
    pub direction: Direction,
}

pub fn abstract_explanation(model: &Model, s: &Assignment, s_prime: &Assignment) -> Result<AbstractExplanation, ExplainError> {
    let quality_diff = model.evaluate_objective(s)? - model.evaluate_objective(s_prime)?;
    Ok(AbstractExplanation { quality_diff, direction: Direction::of(model.sense(), &quality_diff) })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplanationEntry {
    pub id: usize,
    pub var: String,
    pub agents: Vec<String>,
    /// S′_v − S_v.
    #[serde(with = "rational")]
    pub delta: Rational,
    /// |c_v · delta|.
    #[serde(with = "rational")]
    pub contribution: Rational,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentChanges {
    pub increases: Vec<ExplanationEntry>,
    pub decreases: Vec<ExplanationEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Explanation {
    #[serde(rename = "abstract")]
    pub summary: AbstractExplanation,
    pub increases: Vec<ExplanationEntry>,
    pub decreases: Vec<ExplanationEntry>,
    /// Affected agents only, in model agent order. A change touching k agents
    /// is listed under each of them.
    pub per_agent: IndexMap<String, AgentChanges>,
    /// Part of the quality difference carried by non-solution variables.
    #[serde(with = "rational")]
    pub residual_fg: Rational,
    pub length: usize,
    /// q(f(S)) / q(f(S′)); absent when q(f(S′)) = 0.
    #[serde(with = "rational::option")]
    pub suboptimality_ratio: Option<Rational>,
    #[serde(with = "rational")]
    pub q_original: Rational,
    #[serde(with = "rational")]
    pub q_hypothetical: Rational,
}

impl Explanation {
    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    /// Σ_D c·|Δ| − Σ_I c·|Δ| over the listed entries, with the sign of c
    /// restored; equals quality_diff − residual_fg.
    pub fn signed_contribution_sum(&self, model: &Model) -> Rational {
        let coefs = model.objective_coefficients();
        let signed = |e: &ExplanationEntry| coefs[e.id].signum() * e.contribution;
        self.decreases.iter().map(signed).sum::<Rational>() - self.increases.iter().map(signed).sum::<Rational>()
    }
}

fn entry(model: &Model, coefs: &[Rational], var: usize, delta: Rational) -> ExplanationEntry {
    ExplanationEntry {
        id: var,
        var: model.variable(var).name.clone(),
        agents: model.agent_names(var),
        delta,
        contribution: (coefs[var] * delta).abs(),
    }
}

/// Full explanation of moving from `s` to `s_prime` (both complete base-model
/// assignments).
pub fn full_explanation(model: &Model, s: &Assignment, s_prime: &Assignment) -> Result<Explanation, ExplainError> {
    let changes = compute_changes(model, s, s_prime)?;
    let summary = abstract_explanation(model, s, s_prime)?;
    let coefs = model.objective_coefficients();
    let delta = |v: usize| s_prime.get(v) - s.get(v);
    let increases: Vec<_> = changes.increases.iter().map(|v| entry(model, &coefs, *v, delta(*v))).collect();
    let decreases: Vec<_> = changes.decreases.iter().map(|v| entry(model, &coefs, *v, delta(*v))).collect();

    let mut per_agent: IndexMap<String, AgentChanges> = IndexMap::new();
    for (ai, agent) in model.agents().iter().enumerate() {
        let mine = |es: &[ExplanationEntry]| -> Vec<ExplanationEntry> {
            es.iter().filter(|e| model.variable(e.id).agents.contains(&ai)).cloned().collect()
        };
        let view = AgentChanges { increases: mine(&increases), decreases: mine(&decreases) };
        if !view.increases.is_empty() || !view.decreases.is_empty() {
            per_agent.insert(agent.clone(), view);
        }
    }

    let residual_fg = model
        .objective()
        .iter()
        .filter(|(v, _)| !model.variable(*v).is_solution)
        .map(|(v, c)| *c * (s.get(*v) - s_prime.get(*v)))
        .sum();
    let q_original = model.evaluate_objective(s)?;
    let q_hypothetical = model.evaluate_objective(s_prime)?;
    let suboptimality_ratio = (!q_hypothetical.is_zero()).then(|| q_original / q_hypothetical);
    Ok(Explanation {
        summary,
        length: increases.len() + decreases.len(),
        increases,
        decreases,
        per_agent,
        residual_fg,
        suboptimality_ratio,
        q_original,
        q_hypothetical,
    })
}

/// Hamming distance over solution variables (Σ|Δ| for general integers).
pub fn hamming(model: &Model, s: &Assignment, s_prime: &Assignment) -> Rational {
    model.solution_vars().map(|v| (s.get(v.id) - s_prime.get(v.id)).abs()).sum()
}
