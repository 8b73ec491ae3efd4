//! Hypothetical problems: the base model plus an enforced property, one
//! change variable per solution variable, and a weighted objective that
//! trades quality against the number of changes.
//!
//! Derived objective (maximization): α·f̂(x′) − β·Σ_v z_v, where f̂ is the base
//! objective in maximization sense and z_v ∈ [0, u_v − l_v] is tied to
//! |x′_v − s_v| by two rows per solution variable.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Assignment, LinearConstraint, Model, ModelError, Relation, VarKind, Variable};
use crate::rational::{self, int, JsonRational, Rational};
use crate::solver::{self, SolveError, SolveParams, SolveResult, SolveStatus};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HcmaopError {
    #[error("objective has non-integral coefficients or continuous terms; supply custom weights")]
    NonIntegralObjective,
    #[error("model has no solution variables")]
    NoSolutionVariables,
    #[error("weights must be positive (alpha = {alpha}, beta = {beta})")]
    InvalidWeights { alpha: String, beta: String },
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("target {target} for {name} lies outside its bounds or domain")]
    InfeasibleTarget { name: String, target: String },
    #[error("property has no fixings")]
    EmptyProperty,
    #[error("reference solution is not feasible for the model")]
    InfeasibleSolution,
    #[error("the requested property contradicts the problem constraints: {0}")]
    PropertyInfeasible(String),
    #[error("hypothetical problem was not solved to optimality within the limits")]
    TimedOut,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// A hypothesis "the solution should satisfy these fixings".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Property {
    pub fixings: Vec<(usize, Rational)>,
    pub description: String,
}

impl Property {
    pub fn fix(var: usize, target: Rational, description: impl Into<String>) -> Self {
        Property { fixings: vec![(var, target)], description: description.into() }
    }

    pub fn from_json(model: &Model, json: &PropertyJson) -> Result<Self, HcmaopError> {
        let fixings = json
            .fixings
            .iter()
            .map(|(name, target)| {
                model.var_id(name).map(|v| (v, target.0)).ok_or_else(|| HcmaopError::UnknownVariable(name.clone()))
            })
            .collect::<Result<_, _>>()?;
        Ok(Property { fixings, description: json.description.clone() })
    }

    pub fn to_json(&self, model: &Model) -> PropertyJson {
        PropertyJson {
            fixings: self.fixings.iter().map(|(v, t)| (model.variable(*v).name.clone(), JsonRational(*t))).collect(),
            description: self.description.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyJson {
    pub fixings: Vec<(String, JsonRational)>,
    #[serde(default)]
    pub description: String,
}

/// Weighting scheme. Serialized as `"q"`, `"c"` or `{"alpha": …, "beta": …}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Variant {
    Preset(Preset),
    Custom {
        #[serde(with = "rational")]
        alpha: Rational,
        #[serde(with = "rational")]
        beta: Rational,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// Quality first, then fewest changes.
    #[serde(rename = "q")]
    Q,
    /// Fewest changes first, then quality.
    #[serde(rename = "c")]
    C,
}

impl Variant {
    pub const Q: Variant = Variant::Preset(Preset::Q);
    pub const C: Variant = Variant::Preset(Preset::C);

    pub fn label(&self) -> &'static str {
        match self {
            Variant::Preset(Preset::Q) => "Q",
            Variant::Preset(Preset::C) => "C",
            Variant::Custom { .. } => "custom",
        }
    }
}

impl Default for Variant {
    fn default() -> Self {
        Variant::Q
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Weights {
    #[serde(with = "rational")]
    pub alpha: Rational,
    #[serde(with = "rational")]
    pub beta: Rational,
    pub variant: Variant,
}

/// Σ over solution variables of (u − l): the largest possible Σz.
fn max_changes(model: &Model) -> Rational {
    model.solution_vars().map(|v| v.upper - v.lower).sum()
}

/// Largest possible spread of the objective over the variable box.
fn objective_range(model: &Model) -> Rational {
    model.objective().iter().map(|(v, c)| c.abs() * (model.variable(*v).upper - model.variable(*v).lower)).sum()
}

/// Every feasible point has an integral objective value.
fn objective_is_integral(model: &Model) -> bool {
    model.objective().iter().all(|(v, c)| c.is_zero() || (c.is_integer() && model.variable(*v).kind.is_integral()))
}

/// Weights that make the derived objective exactly lexicographic.
///
/// Q: α = Σ_S(u − l) + 1 (that is |S| + 1 over binaries), β = 1. One unit of
/// quality outweighs every possible change, so quality is optimized first.
/// C: α = 1, β = R + 1 with R = Σ|c|(u − l). One avoided change outweighs the
/// whole quality range.
pub fn derive_weights(model: &Model, variant: Variant) -> Result<Weights, HcmaopError> {
    if model.solution_vars().next().is_none() {
        return Err(HcmaopError::NoSolutionVariables);
    }
    let (alpha, beta) = match variant {
        Variant::Preset(Preset::Q) => {
            if !objective_is_integral(model) {
                return Err(HcmaopError::NonIntegralObjective);
            }
            (max_changes(model) + int(1), int(1))
        }
        Variant::Preset(Preset::C) => {
            if !objective_is_integral(model) {
                return Err(HcmaopError::NonIntegralObjective);
            }
            (int(1), objective_range(model) + int(1))
        }
        Variant::Custom { alpha, beta } => (alpha, beta),
    };
    if alpha <= Rational::zero() || beta <= Rational::zero() {
        return Err(HcmaopError::InvalidWeights {
            alpha: rational::format_rational(&alpha),
            beta: rational::format_rational(&beta),
        });
    }
    Ok(Weights { alpha, beta, variant })
}

/// A derived hypothetical problem. Base variables keep their ids; z variables
/// follow them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HcmaopModel {
    pub model: Model,
    pub base: Model,
    /// (solution variable id, z variable id), in solution-variable order.
    pub z_vars: Vec<(usize, usize)>,
    pub property: Property,
    pub property_constraint_ids: Vec<usize>,
    pub z_constraint_ids: Vec<usize>,
    pub weights: Weights,
    pub original_solution: Assignment,
}

pub fn build_hcmaop(
    model: &Model,
    solution: &Assignment,
    property: &Property,
    weights: Weights,
) -> Result<HcmaopModel, HcmaopError> {
    if property.fixings.is_empty() {
        return Err(HcmaopError::EmptyProperty);
    }
    if weights.alpha <= Rational::zero() || weights.beta <= Rational::zero() {
        return Err(HcmaopError::InvalidWeights {
            alpha: rational::format_rational(&weights.alpha),
            beta: rational::format_rational(&weights.beta),
        });
    }
    if !model.check_feasibility(solution)?.is_feasible() {
        return Err(HcmaopError::InfeasibleSolution);
    }
    for (v, target) in &property.fixings {
        if *v >= model.num_vars() {
            return Err(HcmaopError::UnknownVariable(format!("#{v}")));
        }
        let var = model.variable(*v);
        if *target < var.lower || *target > var.upper || (var.kind.is_integral() && !target.is_integer()) {
            return Err(HcmaopError::InfeasibleTarget {
                name: var.name.clone(),
                target: rational::format_rational(target),
            });
        }
    }

    let n = model.num_vars();
    let mut variables: Vec<Variable> = model.variables().to_vec();
    let mut constraints: Vec<LinearConstraint> = model.constraints().to_vec();
    let sign = model.sense().sign();
    let mut objective: Vec<(usize, Rational)> =
        model.objective().iter().map(|(v, c)| (*v, weights.alpha * sign * *c)).collect();

    let mut property_constraint_ids = Vec::with_capacity(property.fixings.len());
    for (v, target) in &property.fixings {
        property_constraint_ids.push(constraints.len());
        constraints.push(LinearConstraint::new(vec![(*v, int(1))], Relation::Eq, *target));
    }

    let mut z_vars = Vec::new();
    let mut z_constraint_ids = Vec::new();
    for var in model.solution_vars() {
        let z = n + z_vars.len();
        variables.push(Variable {
            id: z,
            name: format!("z[{}]", var.name),
            kind: VarKind::Continuous,
            lower: Rational::zero(),
            upper: var.upper - var.lower,
            is_solution: false,
            agents: Vec::new(),
        });
        let s = solution.get(var.id);
        z_constraint_ids.push(constraints.len());
        constraints.push(LinearConstraint::new(vec![(var.id, int(1)), (z, int(-1))], Relation::Le, s));
        z_constraint_ids.push(constraints.len());
        constraints.push(LinearConstraint::new(vec![(var.id, int(-1)), (z, int(-1))], Relation::Le, -s));
        objective.push((z, -weights.beta));
        z_vars.push((var.id, z));
    }

    let derived = Model::build(
        variables,
        constraints,
        objective,
        crate::model::Sense::Maximize,
        model.agents().to_vec(),
        model.metadata().clone(),
    )?;
    Ok(HcmaopModel {
        model: derived,
        base: model.clone(),
        z_vars,
        property: property.clone(),
        property_constraint_ids,
        z_constraint_ids,
        weights,
        original_solution: solution.clone(),
    })
}

/// Optimal answer to a hypothetical problem, restated on the base model.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothetical {
    /// Full base-model assignment x′ (S′ is its restriction to S).
    pub assignment: Assignment,
    /// q(f(x′)) under the base objective, native sense.
    pub quality: Rational,
    /// Σ z at the optimum.
    pub changes: Rational,
    /// Value of the weighted objective.
    pub weighted_objective: Rational,
    pub result: SolveResult,
}

impl HcmaopModel {
    /// Restricts a derived assignment to the base variables.
    pub fn base_assignment(&self, derived: &Assignment) -> Assignment {
        Assignment::new(derived.values[..self.base.num_vars()].to_vec())
    }

    pub fn z_total(&self, derived: &Assignment) -> Rational {
        self.z_vars.iter().map(|(_, z)| derived.get(*z)).sum()
    }

    /// Interprets a solve result of the derived model.
    pub fn interpret(&self, result: SolveResult) -> Result<Hypothetical, HcmaopError> {
        match result.status {
            SolveStatus::Infeasible => Err(HcmaopError::PropertyInfeasible(self.property.description.clone())),
            SolveStatus::TimedOut => Err(HcmaopError::TimedOut),
            SolveStatus::Optimal => {
                let derived = result.assignment.as_ref().expect("optimal result carries an assignment");
                let assignment = self.base_assignment(derived);
                let quality = self.base.evaluate_objective(&assignment)?;
                let changes = self.z_total(derived);
                let weighted_objective = result.objective.expect("optimal result carries an objective");
                Ok(Hypothetical { assignment, quality, changes, weighted_objective, result })
            }
        }
    }
}

pub fn solve_hcmaop(hcmaop: &HcmaopModel, params: &SolveParams) -> Result<Hypothetical, HcmaopError> {
    hcmaop.interpret(solver::solve(&hcmaop.model, params)?)
}

/// Same as [`solve_hcmaop`] with exhaustive enumeration in place of search.
pub fn brute_force_hcmaop(hcmaop: &HcmaopModel) -> Result<Hypothetical, HcmaopError> {
    hcmaop.interpret(solver::brute_force(&hcmaop.model)?)
}
