//! Problem domains: instance generation, model construction, question
//! enumeration and rendering templates.
//!
//! Every builder emits variables in a fixed order and returns a parallel list
//! of [`VarRole`]s, so a variable id always maps back to domain terms.

mod cvrp;
mod kp;
mod questions;
mod tap;
mod wsp;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explain::RenderTemplate;
use crate::model::{Model, ModelError};

pub use cvrp::{decode_routes, CvrpInstance, Route, RouteError, DEPOT, MAX_POINTS};
pub use kp::KpInstance;
pub use questions::{enumerate_questions, sample_questions, Question};
pub use tap::TapInstance;
pub use wsp::{PairAffinity, WspInstance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("CVRP with {0} non-depot points exceeds the limit of {MAX_POINTS}")]
    TooManyPoints(usize),
    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Domain {
    #[serde(rename = "kp")]
    Kp,
    #[serde(rename = "kp-fair")]
    KpFair,
    #[serde(rename = "tap")]
    Tap,
    #[serde(rename = "wsp")]
    Wsp,
    #[serde(rename = "cvrp")]
    Cvrp,
}

impl Domain {
    pub const ALL: [Domain; 5] = [Domain::Kp, Domain::KpFair, Domain::Tap, Domain::Wsp, Domain::Cvrp];

    pub fn tag(self) -> &'static str {
        match self {
            Domain::Kp => "kp",
            Domain::KpFair => "kp-fair",
            Domain::Tap => "tap",
            Domain::Wsp => "wsp",
            Domain::Cvrp => "cvrp",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Domain {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Domain::ALL
            .into_iter()
            .find(|d| d.tag() == s.to_ascii_lowercase())
            .ok_or_else(|| DomainError::InvalidParams(format!("unknown domain {s:?}")))
    }
}

/// Size knobs; each domain reads the ones it needs and defaults the rest.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SizeParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agents: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub items: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tasks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tables: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vehicles: Option<usize>,
}

impl SizeParams {
    pub fn kp(agents: usize, items: usize) -> Self {
        SizeParams { agents: Some(agents), items: Some(items), ..Default::default() }
    }

    pub fn tap(agents: usize, tasks: usize) -> Self {
        SizeParams { agents: Some(agents), tasks: Some(tasks), ..Default::default() }
    }

    pub fn wsp(agents: usize, tables: usize) -> Self {
        SizeParams { agents: Some(agents), tables: Some(tables), ..Default::default() }
    }

    pub fn cvrp(points: usize, vehicles: usize) -> Self {
        SizeParams { points: Some(points), vehicles: Some(vehicles), ..Default::default() }
    }

    /// The knob a benchmark ladder scales for `domain`.
    pub fn scale(&self, domain: Domain) -> usize {
        let d = Resolved::new(domain, self);
        match domain {
            Domain::Kp | Domain::KpFair | Domain::Wsp => d.agents,
            Domain::Tap => d.tasks,
            Domain::Cvrp => d.points,
        }
    }
}

/// SizeParams with defaults filled in.
struct Resolved {
    agents: usize,
    items: usize,
    tasks: usize,
    tables: usize,
    points: usize,
    vehicles: usize,
}

impl Resolved {
    fn new(domain: Domain, p: &SizeParams) -> Self {
        let (agents, items, tasks, tables, points, vehicles) = match domain {
            Domain::Kp | Domain::KpFair => (4, 10, 0, 0, 0, 0),
            Domain::Tap => (5, 0, 10, 0, 0, 0),
            Domain::Wsp => (6, 0, 0, 3, 0, 0),
            Domain::Cvrp => (0, 0, 0, 0, 4, 2),
        };
        Resolved {
            agents: p.agents.unwrap_or(agents),
            items: p.items.unwrap_or(items),
            tasks: p.tasks.unwrap_or(tasks),
            tables: p.tables.unwrap_or(tables),
            points: p.points.unwrap_or(points),
            vehicles: p.vehicles.unwrap_or(vehicles),
        }
    }
}

/// Request to generate an instance or load a shipped fixture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub domain: Domain,
    #[serde(default)]
    pub size: SizeParams,
    #[serde(default)]
    pub seed: u64,
    /// Name of a shipped fixture; overrides size and seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
}

impl GenSpec {
    pub fn realize(&self) -> Result<Instance, DomainError> {
        match &self.fixture {
            Some(name) => fixture(name),
            None => generate_instance(self.domain, &self.size, self.seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "domain")]
pub enum Instance {
    #[serde(rename = "kp")]
    Kp(KpInstance),
    #[serde(rename = "kp-fair")]
    KpFair(KpInstance),
    #[serde(rename = "tap")]
    Tap(TapInstance),
    #[serde(rename = "wsp")]
    Wsp(WspInstance),
    #[serde(rename = "cvrp")]
    Cvrp(CvrpInstance),
}

/// What a model variable stands for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum VarRole {
    Item { agent: String, item: String },
    MinItems,
    Task { agent: String, task: String },
    Seat { agent: String, table: String },
    Pair { first: String, second: String, table: String },
    Leg { from: String, to: String, vehicle: String },
}

impl VarRole {
    /// Whether users may ask about this variable.
    pub fn is_askable(&self) -> bool {
        !matches!(self, VarRole::MinItems)
    }

    pub fn prompt(&self) -> String {
        match self {
            VarRole::Item { agent, item } => format!("Why was {agent}'s {item} not included in the depot?"),
            VarRole::MinItems => "Why is the fairness term not higher?".into(),
            VarRole::Task { agent, task } => format!("Why was task {task} not allocated to {agent}?"),
            VarRole::Seat { agent, table } => format!("Why was {agent} not seated at table {table}?"),
            VarRole::Pair { first, second, table } => {
                format!("Why were {first} and {second} not seated together at table {table}?")
            }
            VarRole::Leg { from, to, vehicle } => format!("Why does vehicle {vehicle} not travel from {from} to {to}?"),
        }
    }

    /// Short label for explanation tables.
    pub fn label(&self) -> String {
        match self {
            VarRole::Item { item, .. } => item.clone(),
            VarRole::MinItems => "minItems".into(),
            VarRole::Task { task, .. } => task.clone(),
            VarRole::Seat { table, .. } => format!("table {table}"),
            VarRole::Pair { first, second, table } => format!("{first} & {second} at {table}"),
            VarRole::Leg { from, to, .. } => format!("{from} -> {to}"),
        }
    }
}

impl Instance {
    pub fn domain(&self) -> Domain {
        match self {
            Instance::Kp(_) => Domain::Kp,
            Instance::KpFair(_) => Domain::KpFair,
            Instance::Tap(_) => Domain::Tap,
            Instance::Wsp(_) => Domain::Wsp,
            Instance::Cvrp(_) => Domain::Cvrp,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Instance::Kp(i) | Instance::KpFair(i) => i.seed,
            Instance::Tap(i) => i.seed,
            Instance::Wsp(i) => i.seed,
            Instance::Cvrp(i) => i.seed,
        }
    }

    pub fn agents(&self) -> &[String] {
        match self {
            Instance::Kp(i) | Instance::KpFair(i) => &i.agents,
            Instance::Tap(i) => &i.agents,
            Instance::Wsp(i) => &i.agents,
            Instance::Cvrp(i) => &i.vehicles,
        }
    }

    /// Builds the model together with the role of every variable.
    pub fn build(&self) -> Result<(Model, Vec<VarRole>), DomainError> {
        match self {
            Instance::Kp(i) => i.build(false),
            Instance::KpFair(i) => i.build(true),
            Instance::Tap(i) => i.build(),
            Instance::Wsp(i) => i.build(),
            Instance::Cvrp(i) => i.build(),
        }
    }

    pub fn template(&self, roles: &[VarRole]) -> RenderTemplate {
        let (objective_noun, item_noun, residual_label) = match self.domain() {
            Domain::Kp => ("utility", "items", "Other objective terms"),
            Domain::KpFair => ("utility", "items", "Fairness term (minItems)"),
            Domain::Tap => ("utility", "tasks", "Other objective terms"),
            Domain::Wsp => ("affinity", "seats", "Pair affinity"),
            Domain::Cvrp => ("distance", "legs", "Other objective terms"),
        };
        RenderTemplate {
            objective_noun: objective_noun.into(),
            item_noun: item_noun.into(),
            labels: roles.iter().enumerate().map(|(v, r)| (v, r.label())).collect(),
            residual_label: residual_label.into(),
        }
    }
}

pub fn build_model(instance: &Instance) -> Result<Model, DomainError> {
    instance.build().map(|(m, _)| m)
}

pub fn generate_instance(domain: Domain, size: &SizeParams, seed: u64) -> Result<Instance, DomainError> {
    let p = Resolved::new(domain, size);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positive = |n: usize, what: &str| {
        if n == 0 {
            Err(DomainError::InvalidParams(format!("{what} must be positive")))
        } else {
            Ok(n)
        }
    };
    Ok(match domain {
        Domain::Kp | Domain::KpFair => {
            let inst = KpInstance::generate(positive(p.agents, "agents")?, positive(p.items, "items")?, seed, &mut rng);
            if domain == Domain::Kp {
                Instance::Kp(inst)
            } else {
                Instance::KpFair(inst)
            }
        }
        Domain::Tap => {
            Instance::Tap(TapInstance::generate(positive(p.agents, "agents")?, positive(p.tasks, "tasks")?, seed, &mut rng))
        }
        Domain::Wsp => {
            Instance::Wsp(WspInstance::generate(positive(p.agents, "agents")?, positive(p.tables, "tables")?, seed, &mut rng))
        }
        Domain::Cvrp => {
            let (m, v) = (positive(p.points, "points")?, positive(p.vehicles, "vehicles")?);
            if m > MAX_POINTS {
                return Err(DomainError::TooManyPoints(m));
            }
            if v > m {
                return Err(DomainError::InvalidParams(format!("{v} vehicles need at least {v} points")));
            }
            Instance::Cvrp(CvrpInstance::generate(m, v, seed, &mut rng))
        }
    })
}

const AGENT_NAMES: [&str; 20] = [
    "Alice", "Bob", "Carol", "Dave", "Erin", "Frank", "Grace", "Heidi", "Ivan", "Judy", "Mallory", "Niaj", "Olivia",
    "Peggy", "Rupert", "Sybil", "Trent", "Victor", "Walter", "Yvonne",
];

pub(crate) fn agent_names(n: usize) -> Vec<String> {
    (0..n).map(|i| AGENT_NAMES.get(i).map_or_else(|| format!("Agent{}", i + 1), |s| s.to_string())).collect()
}

pub(crate) fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

pub(crate) fn ceil_div(a: i64, b: i64) -> i64 {
    (a + b - 1) / b
}

pub(crate) fn check_unique(names: &[String], what: &str) -> Result<(), DomainError> {
    let mut seen = std::collections::HashSet::new();
    for n in names {
        if n.is_empty() || !seen.insert(n) {
            return Err(DomainError::InvalidInstance(format!("{what} names must be nonempty and unique ({n:?})")));
        }
    }
    Ok(())
}

const KP_MICRO: &str = include_str!("../../fixtures/kp-micro.json");
const TAP_MICRO: &str = include_str!("../../fixtures/tap-micro.json");

pub const FIXTURES: [&str; 2] = ["kp-micro", "tap-micro"];

pub fn fixture(name: &str) -> Result<Instance, DomainError> {
    let text = match name {
        "kp-micro" => KP_MICRO,
        "tap-micro" => TAP_MICRO,
        _ => return Err(DomainError::UnknownFixture(name.to_string())),
    };
    serde_json::from_str(text).map_err(|e| DomainError::InvalidInstance(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::solver::{brute_force, solve, SolveParams};

    #[test]
    fn kp_micro_fixture() {
        let inst = fixture("kp-micro").unwrap();
        let (m, roles) = inst.build().unwrap();
        assert_eq!(m.solution_vars().count(), 3);
        assert_eq!(m.constraints().len(), 1);
        assert_eq!(roles.len(), 3);
        let r = solve(&m, &SolveParams::default()).unwrap();
        assert_eq!(r.objective, Some(int(7)));
        let chosen: Vec<_> =
            m.variables().iter().filter(|v| r.assignment.as_ref().unwrap().get(v.id) == int(1)).map(|v| v.name.as_str()).collect();
        assert_eq!(chosen, ["x[Alice][lamp]", "x[Bob][bed]"]);
        assert_eq!(brute_force(&m).unwrap().objective, Some(int(7)));
    }

    #[test]
    fn tap_micro_fixture_solves() {
        let m = build_model(&fixture("tap-micro").unwrap()).unwrap();
        assert_eq!(solve(&m, &SolveParams::default()).unwrap().objective, brute_force(&m).unwrap().objective);
    }

    #[test]
    fn generation_is_deterministic() {
        for d in Domain::ALL {
            let a = generate_instance(d, &SizeParams::default(), 7).unwrap();
            let b = generate_instance(d, &SizeParams::default(), 7).unwrap();
            assert_eq!(a, b);
            assert_eq!(serde_json::to_string(&build_model(&a).unwrap()).unwrap(), serde_json::to_string(&build_model(&b).unwrap()).unwrap());
        }
    }

    #[test]
    fn instance_json_round_trip() {
        for d in Domain::ALL {
            let a = generate_instance(d, &SizeParams::default(), 3).unwrap();
            let text = serde_json::to_string(&a).unwrap();
            assert!(text.contains(&format!("\"domain\":\"{}\"", d.tag())));
            assert_eq!(serde_json::from_str::<Instance>(&text).unwrap(), a);
        }
    }

    #[test]
    fn invalid_sizes() {
        assert!(matches!(generate_instance(Domain::Kp, &SizeParams::kp(0, 3), 1), Err(DomainError::InvalidParams(_))));
        assert_eq!(generate_instance(Domain::Cvrp, &SizeParams::cvrp(11, 2), 1), Err(DomainError::TooManyPoints(11)));
        assert!(generate_instance(Domain::Cvrp, &SizeParams::cvrp(2, 3), 1).is_err());
        assert!(matches!(fixture("nope"), Err(DomainError::UnknownFixture(_))));
    }

    #[test]
    fn domain_parsing() {
        assert_eq!("KP-fair".parse::<Domain>().unwrap(), Domain::KpFair);
        assert!("tsp".parse::<Domain>().is_err());
    }
}
