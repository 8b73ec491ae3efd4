//! Linear optimization models over typed variables.
//!
//! A [`Model`] is immutable once built: everything that derives a new problem
//! from it (normalization, hypothetical problems) produces a fresh model.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, int, JsonRational, Rational};

/// Absolute slack allowed on rows that involve continuous variables. Every
/// built-in path is exact, so this only matters for values produced by an
/// external floating-point backend.
pub fn continuous_tolerance() -> Rational {
    Rational::new(1, 1_000_000_000)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid model: {0}")]
    Validation(String),
    #[error("assignment is incomplete: expected {expected} values, got {got}")]
    IncompleteAssignment { expected: usize, got: usize },
    #[error("variable {name} is integer-kind but holds {value}")]
    NonIntegralValue { name: String, value: String },
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub id: usize,
    pub name: String,
    pub kind: VarKind,
    pub lower: Rational,
    pub upper: Rational,
    /// Membership in the solution-variable set S.
    pub is_solution: bool,
    /// Indices into [`Model::agents`], sorted and deduplicated.
    pub agents: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl LinearConstraint {
    pub fn new(terms: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) -> Self {
        LinearConstraint { terms, relation, rhs }
    }

    pub fn activity(&self, values: &[Rational]) -> Rational {
        self.terms.iter().map(|(v, c)| *c * values[*v]).sum()
    }

    /// Signed slack: non-negative iff the relation holds.
    pub fn slack(&self, values: &[Rational]) -> Rational {
        let lhs = self.activity(values);
        match self.relation {
            Relation::Le => self.rhs - lhs,
            Relation::Ge => lhs - self.rhs,
            Relation::Eq => -(lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "max")]
    Maximize,
    #[serde(rename = "min")]
    Minimize,
}

impl Sense {
    /// `true` when `a` is strictly better than `b` under this sense.
    pub fn better(self, a: &Rational, b: &Rational) -> bool {
        match self {
            Sense::Maximize => a > b,
            Sense::Minimize => a < b,
        }
    }

    /// Multiplier that maps native objective values to maximization values.
    pub fn sign(self) -> Rational {
        match self {
            Sense::Maximize => Rational::one(),
            Sense::Minimize => -Rational::one(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    #[serde(flatten)]
    pub labels: BTreeMap<String, String>,
}

impl Metadata {
    pub fn domain(domain: &str) -> Self {
        Metadata { domain: Some(domain.to_string()), labels: BTreeMap::new() }
    }
}

/// A complete assignment of values to every variable of a model, indexed by
/// variable id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    #[serde(with = "rational::vec")]
    pub values: Vec<Rational>,
}

impl Assignment {
    pub fn new(values: Vec<Rational>) -> Self {
        Assignment { values }
    }

    pub fn zeros(len: usize) -> Self {
        Assignment { values: vec![Rational::zero(); len] }
    }

    pub fn get(&self, var: usize) -> Rational {
        self.values[var]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Name-keyed view, in variable id order.
    pub fn to_named(&self, model: &Model) -> indexmap::IndexMap<String, JsonRational> {
        model
            .variables()
            .iter()
            .zip(&self.values)
            .map(|(v, x)| (v.name.clone(), JsonRational(*x)))
            .collect()
    }

    pub fn from_named(model: &Model, named: &indexmap::IndexMap<String, JsonRational>) -> Result<Self, ModelError> {
        let mut values = vec![None; model.num_vars()];
        for (name, value) in named {
            let id = model.var_id(name).ok_or_else(|| ModelError::UnknownVariable(name.clone()))?;
            values[id] = Some(value.0);
        }
        let got = values.iter().filter(|v| v.is_some()).count();
        if got != values.len() {
            return Err(ModelError::IncompleteAssignment { expected: values.len(), got });
        }
        Ok(Assignment { values: values.into_iter().map(Option::unwrap).collect() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationSite {
    Constraint(usize),
    Bound(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub site: ViolationSite,
    /// Negative amount by which the relation fails.
    pub slack: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    Violations(Vec<Violation>),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ModelJson", try_from = "ModelJson")]
pub struct Model {
    variables: Vec<Variable>,
    constraints: Vec<LinearConstraint>,
    objective: Vec<(usize, Rational)>,
    sense: Sense,
    agents: Vec<String>,
    metadata: Metadata,
    by_name: HashMap<String, usize>,
}

impl Model {
    /// Validated constructor. Variable ids must equal their position.
    pub fn build(
        variables: Vec<Variable>,
        constraints: Vec<LinearConstraint>,
        objective: Vec<(usize, Rational)>,
        sense: Sense,
        agents: Vec<String>,
        metadata: Metadata,
    ) -> Result<Model, ModelError> {
        let bad = |msg: String| Err(ModelError::Validation(msg));
        let n = variables.len();
        let mut agent_names = HashSet::new();
        for a in &agents {
            if !agent_names.insert(a.as_str()) {
                return bad(format!("duplicate agent {a:?}"));
            }
        }
        let mut by_name = HashMap::with_capacity(n);
        for (pos, v) in variables.iter().enumerate() {
            if v.id != pos {
                return bad(format!("variable {:?} has id {} at position {pos}", v.name, v.id));
            }
            if v.name.is_empty() {
                return bad(format!("variable {pos} has an empty name"));
            }
            if by_name.insert(v.name.clone(), pos).is_some() {
                return bad(format!("duplicate variable name {:?}", v.name));
            }
            if v.lower > v.upper {
                return bad(format!("variable {:?} has lower bound above upper bound", v.name));
            }
            match v.kind {
                VarKind::Binary if v.lower != int(0) || v.upper != int(1) => {
                    return bad(format!("binary variable {:?} must have bounds [0, 1]", v.name));
                }
                VarKind::Integer if !v.lower.is_integer() || !v.upper.is_integer() => {
                    return bad(format!("integer variable {:?} must have integral bounds", v.name));
                }
                _ => {}
            }
            if let Some(a) = v.agents.iter().find(|a| **a >= agents.len()) {
                return bad(format!("variable {:?} references agent index {a} outside the agent list", v.name));
            }
            if v.agents.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("variable {:?} has unsorted or duplicate agents", v.name));
            }
        }
        for (ci, c) in constraints.iter().enumerate() {
            check_terms(&c.terms, n).map_err(|m| ModelError::Validation(format!("constraint {ci}: {m}")))?;
        }
        check_terms(&objective, n).map_err(|m| ModelError::Validation(format!("objective: {m}")))?;
        Ok(Model { variables, constraints, objective, sense, agents, metadata, by_name })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: usize) -> &Variable {
        &self.variables[id]
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(usize, Rational)] {
        &self.objective
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn metadata(&self) -> &Metadata {
        &self.metadata
    }

    pub fn var_id(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn solution_vars(&self) -> impl Iterator<Item = &Variable> {
        self.variables.iter().filter(|v| v.is_solution)
    }

    /// Dense objective coefficient vector.
    pub fn objective_coefficients(&self) -> Vec<Rational> {
        let mut dense = vec![Rational::zero(); self.num_vars()];
        for (v, c) in &self.objective {
            dense[*v] = *c;
        }
        dense
    }

    pub fn agent_names(&self, var: usize) -> Vec<String> {
        self.variables[var].agents.iter().map(|a| self.agents[*a].clone()).collect()
    }

    fn ensure_complete(&self, assignment: &Assignment) -> Result<(), ModelError> {
        if assignment.len() != self.num_vars() {
            return Err(ModelError::IncompleteAssignment { expected: self.num_vars(), got: assignment.len() });
        }
        Ok(())
    }

    /// q(f(x)): the objective value in the model's native sense.
    pub fn evaluate_objective(&self, assignment: &Assignment) -> Result<Rational, ModelError> {
        self.ensure_complete(assignment)?;
        Ok(self.objective.iter().map(|(v, c)| *c * assignment.values[*v]).sum())
    }

    /// Objective restricted to terms over variables with no agents (f_G).
    pub fn evaluate_agent_free_objective(&self, assignment: &Assignment) -> Result<Rational, ModelError> {
        self.ensure_complete(assignment)?;
        Ok(self
            .objective
            .iter()
            .filter(|(v, _)| self.variables[*v].agents.is_empty())
            .map(|(v, c)| *c * assignment.values[*v])
            .sum())
    }

    pub fn check_feasibility(&self, assignment: &Assignment) -> Result<Feasibility, ModelError> {
        self.ensure_complete(assignment)?;
        let values = &assignment.values;
        for v in &self.variables {
            if v.kind.is_integral() && !values[v.id].is_integer() {
                return Err(ModelError::NonIntegralValue {
                    name: v.name.clone(),
                    value: rational::format_rational(&values[v.id]),
                });
            }
        }
        let tol = continuous_tolerance();
        let mut violations = Vec::new();
        for v in &self.variables {
            let x = values[v.id];
            let slack = (x - v.lower).min(v.upper - x);
            let allowed = if v.kind == VarKind::Continuous { -tol } else { Rational::zero() };
            if slack < allowed {
                violations.push(Violation { site: ViolationSite::Bound(v.id), slack });
            }
        }
        for (ci, c) in self.constraints.iter().enumerate() {
            let slack = c.slack(values);
            let continuous = c.terms.iter().any(|(v, _)| self.variables[*v].kind == VarKind::Continuous);
            let allowed = if continuous { -tol } else { Rational::zero() };
            if slack < allowed {
                violations.push(Violation { site: ViolationSite::Constraint(ci), slack });
            }
        }
        Ok(if violations.is_empty() { Feasibility::Feasible } else { Feasibility::Violations(violations) })
    }

    /// Variable ids, as they appear, with bounds; used by the solver.
    pub fn bounds(&self) -> (Vec<Rational>, Vec<Rational>) {
        (self.variables.iter().map(|v| v.lower).collect(), self.variables.iter().map(|v| v.upper).collect())
    }

    /// A copy of this model with extra constraints appended.
    pub fn with_constraints(&self, extra: impl IntoIterator<Item = LinearConstraint>) -> Result<Model, ModelError> {
        let mut constraints = self.constraints.clone();
        constraints.extend(extra);
        Model::build(
            self.variables.clone(),
            constraints,
            self.objective.clone(),
            self.sense,
            self.agents.clone(),
            self.metadata.clone(),
        )
    }

    /// A copy of this model with a different objective and sense.
    pub fn with_objective(&self, objective: Vec<(usize, Rational)>, sense: Sense) -> Result<Model, ModelError> {
        Model::build(
            self.variables.clone(),
            self.constraints.clone(),
            objective,
            sense,
            self.agents.clone(),
            self.metadata.clone(),
        )
    }
}

fn check_terms(terms: &[(usize, Rational)], n: usize) -> Result<(), String> {
    let mut seen = HashSet::with_capacity(terms.len());
    for (v, _) in terms {
        if *v >= n {
            return Err(format!("variable id {v} out of range (model has {n} variables)"));
        }
        if !seen.insert(*v) {
            return Err(format!("duplicate variable id {v}"));
        }
    }
    Ok(())
}

/// A maximization-sense view of a model; `flipped` records whether the
/// objective was negated so reported values can be mapped back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedModel {
    pub model: Model,
    pub flipped: bool,
}

impl NormalizedModel {
    /// Maps a value of the normalized objective back to the native sense.
    pub fn native_value(&self, value: Rational) -> Rational {
        if self.flipped {
            -value
        } else {
            value
        }
    }
}

pub fn normalize_sense(model: &Model) -> NormalizedModel {
    match model.sense {
        Sense::Maximize => NormalizedModel { model: model.clone(), flipped: false },
        Sense::Minimize => {
            let mut flipped = model.clone();
            flipped.objective = model.objective.iter().map(|(v, c)| (*v, -*c)).collect();
            flipped.sense = Sense::Maximize;
            NormalizedModel { model: flipped, flipped: true }
        }
    }
}

/// Incremental construction helper used by the domain builders.
#[derive(Debug, Default)]
pub struct ModelBuilder {
    variables: Vec<Variable>,
    constraints: Vec<LinearConstraint>,
    objective: Vec<(usize, Rational)>,
    agents: Vec<String>,
}

impl ModelBuilder {
    pub fn new(agents: Vec<String>) -> Self {
        ModelBuilder { agents, ..Default::default() }
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: Rational,
        upper: Rational,
        is_solution: bool,
        mut agents: Vec<usize>,
    ) -> usize {
        agents.sort_unstable();
        agents.dedup();
        let id = self.variables.len();
        self.variables.push(Variable { id, name: name.into(), kind, lower, upper, is_solution, agents });
        id
    }

    pub fn add_binary(&mut self, name: impl Into<String>, is_solution: bool, agents: Vec<usize>) -> usize {
        self.add_var(name, VarKind::Binary, int(0), int(1), is_solution, agents)
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) -> usize {
        self.constraints.push(LinearConstraint { terms, relation, rhs });
        self.constraints.len() - 1
    }

    pub fn add_objective_term(&mut self, var: usize, coef: Rational) {
        self.objective.push((var, coef));
    }

    pub fn build(self, sense: Sense, metadata: Metadata) -> Result<Model, ModelError> {
        Model::build(self.variables, self.constraints, self.objective, sense, self.agents, metadata)
    }
}

// ---------------------------------------------------------------------------
// JSON schema (name-keyed)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariableJson {
    pub name: String,
    pub kind: VarKind,
    pub lb: JsonRational,
    pub ub: JsonRational,
    #[serde(default)]
    pub solution: bool,
    #[serde(default)]
    pub agents: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintJson {
    pub terms: Vec<(String, JsonRational)>,
    pub rel: Relation,
    pub rhs: JsonRational,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelJson {
    pub sense: Sense,
    #[serde(default)]
    pub agents: Vec<String>,
    pub variables: Vec<VariableJson>,
    #[serde(default)]
    pub constraints: Vec<ConstraintJson>,
    #[serde(default)]
    pub objective: Vec<(String, JsonRational)>,
    #[serde(default)]
    pub metadata: Metadata,
}

impl From<Model> for ModelJson {
    fn from(model: Model) -> Self {
        let name = |v: usize| model.variables[v].name.clone();
        let terms = |ts: &[(usize, Rational)]| ts.iter().map(|(v, c)| (name(*v), JsonRational(*c))).collect();
        ModelJson {
            sense: model.sense,
            agents: model.agents.clone(),
            variables: model
                .variables
                .iter()
                .map(|v| VariableJson {
                    name: v.name.clone(),
                    kind: v.kind,
                    lb: JsonRational(v.lower),
                    ub: JsonRational(v.upper),
                    solution: v.is_solution,
                    agents: v.agents.iter().map(|a| model.agents[*a].clone()).collect(),
                })
                .collect(),
            constraints: model
                .constraints
                .iter()
                .map(|c| ConstraintJson { terms: terms(&c.terms), rel: c.relation, rhs: JsonRational(c.rhs) })
                .collect(),
            objective: terms(&model.objective),
            metadata: model.metadata.clone(),
        }
    }
}

impl TryFrom<ModelJson> for Model {
    type Error = ModelError;

    fn try_from(json: ModelJson) -> Result<Self, Self::Error> {
        let agent_index: HashMap<&str, usize> = json.agents.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
        let mut var_index = HashMap::new();
        let mut variables = Vec::with_capacity(json.variables.len());
        for (id, v) in json.variables.iter().enumerate() {
            if var_index.insert(v.name.as_str(), id).is_some() {
                return Err(ModelError::Validation(format!("duplicate variable name {:?}", v.name)));
            }
            let mut agents = v
                .agents
                .iter()
                .map(|a| {
                    agent_index
                        .get(a.as_str())
                        .copied()
                        .ok_or_else(|| ModelError::Validation(format!("variable {:?} names unknown agent {a:?}", v.name)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            agents.sort_unstable();
            agents.dedup();
            variables.push(Variable {
                id,
                name: v.name.clone(),
                kind: v.kind,
                lower: v.lb.0,
                upper: v.ub.0,
                is_solution: v.solution,
                agents,
            });
        }
        let resolve = |terms: &[(String, JsonRational)]| -> Result<Vec<(usize, Rational)>, ModelError> {
            terms
                .iter()
                .map(|(name, c)| {
                    var_index
                        .get(name.as_str())
                        .map(|v| (*v, c.0))
                        .ok_or_else(|| ModelError::Validation(format!("term references unknown variable {name:?}")))
                })
                .collect()
        };
        let constraints = json
            .constraints
            .iter()
            .map(|c| Ok(LinearConstraint { terms: resolve(&c.terms)?, relation: c.rel, rhs: c.rhs.0 }))
            .collect::<Result<Vec<_>, ModelError>>()?;
        let objective = resolve(&json.objective)?;
        Model::build(variables, constraints, objective, json.sense, json.agents, json.metadata)
    }
}
