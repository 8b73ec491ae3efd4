use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ceil_div, check_unique, numbered, DomainError, VarRole};
use crate::model::{Assignment, Metadata, Model, ModelBuilder, Relation, Sense};
use crate::rational::int;

pub const DEPOT: &str = "Depot";

/// Subtour rows number 2^m − 1 for m non-depot points.
pub const MAX_POINTS: usize = 10;

/// `points[0]` is the depot. Vehicles are the agents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvrpInstance {
    pub points: Vec<String>,
    pub vehicles: Vec<String>,
    /// Maximum number of non-depot points a vehicle visits.
    pub capacity: IndexMap<String, i64>,
    /// Distance units per ordered pair; not symmetric.
    pub distance: IndexMap<String, IndexMap<String, i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl CvrpInstance {
    pub(super) fn generate(points: usize, vehicles: usize, seed: u64, rng: &mut impl Rng) -> Self {
        let mut all = vec![DEPOT.to_string()];
        all.extend(numbered("P", points));
        let vehicles = numbered("V", vehicles);
        let distance = all
            .iter()
            .map(|i| (i.clone(), all.iter().filter(|j| *j != i).map(|j| (j.clone(), rng.random_range(1..=100))).collect()))
            .collect();
        let cap = ceil_div(points as i64, vehicles.len() as i64) + 1;
        let capacity = vehicles.iter().map(|v| (v.clone(), cap)).collect();
        CvrpInstance { points: all, vehicles, capacity, distance, seed: Some(seed) }
    }

    fn validate(&self) -> Result<(), DomainError> {
        check_unique(&self.points, "point")?;
        check_unique(&self.vehicles, "vehicle")?;
        if self.points.first().map(String::as_str) != Some(DEPOT) {
            return Err(DomainError::InvalidInstance(format!("the first point must be {DEPOT:?}")));
        }
        let m = self.points.len() - 1;
        if m > MAX_POINTS {
            return Err(DomainError::TooManyPoints(m));
        }
        if let Some(v) = self.vehicles.iter().find(|v| !self.capacity.contains_key(*v)) {
            return Err(DomainError::InvalidInstance(format!("no capacity for vehicle {v:?}")));
        }
        for i in &self.points {
            for j in self.points.iter().filter(|j| *j != i) {
                if self.distance.get(i).and_then(|row| row.get(j)).is_none() {
                    return Err(DomainError::InvalidInstance(format!("no distance from {i:?} to {j:?}")));
                }
            }
        }
        Ok(())
    }

    pub(super) fn build(&self) -> Result<(Model, Vec<VarRole>), DomainError> {
        self.validate()?;
        let n = self.points.len();
        let nv = self.vehicles.len();
        let mut b = ModelBuilder::new(self.vehicles.clone());
        let mut roles = Vec::new();
        // x[i][j][v], None on the diagonal.
        let mut x = vec![vec![vec![None; nv]; n]; n];
        for (i, from) in self.points.iter().enumerate() {
            for (j, to) in self.points.iter().enumerate().filter(|(j, _)| *j != i) {
                for (v, vehicle) in self.vehicles.iter().enumerate() {
                    let id = b.add_binary(format!("x[{from}][{to}][{vehicle}]"), true, vec![v]);
                    b.add_objective_term(id, int(self.distance[from][to]));
                    x[i][j][v] = Some(id);
                    roles.push(VarRole::Leg { from: from.clone(), to: to.clone(), vehicle: vehicle.clone() });
                }
            }
        }
        let arc = |i: usize, j: usize, v: usize| x[i][j][v].expect("off-diagonal arc");

        for i in 0..n {
            for v in 0..nv {
                let mut terms: Vec<_> = (0..n).filter(|j| *j != i).map(|j| (arc(i, j, v), int(1))).collect();
                terms.extend((0..n).filter(|j| *j != i).map(|j| (arc(j, i, v), int(-1))));
                b.add_constraint(terms, Relation::Eq, int(0));
            }
        }
        for p in 1..n {
            let terms = (0..n).filter(|i| *i != p).flat_map(|i| (0..nv).map(move |v| (i, v))).map(|(i, v)| (arc(i, p, v), int(1)));
            b.add_constraint(terms.collect(), Relation::Eq, int(1));
        }
        for v in 0..nv {
            b.add_constraint((1..n).map(|j| (arc(0, j, v), int(1))).collect(), Relation::Eq, int(1));
        }
        // Capacity counts visits: arcs entering non-depot points.
        for (v, vehicle) in self.vehicles.iter().enumerate() {
            let terms = (0..n).flat_map(|i| (1..n).filter(move |j| *j != i).map(move |j| (i, j))).map(|(i, j)| (arc(i, j, v), int(1)));
            b.add_constraint(terms.collect(), Relation::Le, int(self.capacity[vehicle]));
        }
        let m = n - 1;
        for mask in 1u32..(1 << m) {
            let inside = |p: usize| p > 0 && mask & (1 << (p - 1)) != 0;
            let mut terms = Vec::new();
            for i in (0..n).filter(|i| inside(*i)) {
                for j in (0..n).filter(|j| !inside(*j)) {
                    terms.extend((0..nv).map(|v| (arc(i, j, v), int(1))));
                }
            }
            b.add_constraint(terms, Relation::Ge, int(1));
        }
        Ok((b.build(Sense::Minimize, Metadata::domain("cvrp"))?, roles))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub vehicle: String,
    /// Starts and ends at the depot.
    pub stops: Vec<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RouteError {
    #[error("vehicle {0} leaves some point more than once")]
    Branching(String),
    #[error("vehicle {0} does not return to the depot")]
    NotClosed(String),
    #[error("vehicle {0} has arcs off its depot tour")]
    Subtour(String),
    #[error("point {0} is visited {1} times")]
    Coverage(String, usize),
    #[error("model does not match the instance")]
    Layout,
}

/// Reads per-vehicle depot tours off a solution of the instance's model.
pub fn decode_routes(instance: &CvrpInstance, model: &Model, solution: &Assignment) -> Result<Vec<Route>, RouteError> {
    let n = instance.points.len();
    let mut visits = vec![0usize; n];
    let mut routes = Vec::new();
    for vehicle in &instance.vehicles {
        let mut next = vec![None; n];
        let mut arcs = 0;
        for (i, slot) in next.iter_mut().enumerate() {
            for j in (0..n).filter(|j| *j != i) {
                let name = format!("x[{}][{}][{vehicle}]", instance.points[i], instance.points[j]);
                let id = model.var_id(&name).ok_or(RouteError::Layout)?;
                if solution.get(id) == int(1) {
                    if slot.is_some() {
                        return Err(RouteError::Branching(vehicle.clone()));
                    }
                    *slot = Some(j);
                    arcs += 1;
                }
            }
        }
        let mut stops = vec![DEPOT.to_string()];
        let mut at = 0;
        let mut walked = 0;
        loop {
            let Some(j) = next[at] else { return Err(RouteError::NotClosed(vehicle.clone())) };
            walked += 1;
            stops.push(instance.points[j].clone());
            if j == 0 {
                break;
            }
            visits[j] += 1;
            if walked > n {
                return Err(RouteError::NotClosed(vehicle.clone()));
            }
            at = j;
        }
        if walked != arcs {
            return Err(RouteError::Subtour(vehicle.clone()));
        }
        routes.push(Route { vehicle: vehicle.clone(), stops });
    }
    if let Some(p) = (1..n).find(|p| visits[*p] != 1) {
        return Err(RouteError::Coverage(instance.points[p].clone(), visits[p]));
    }
    Ok(routes)
}
