use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{agent_names, ceil_div, check_unique, DomainError, VarRole};
use crate::model::{Metadata, Model, ModelBuilder, Relation, Sense, VarKind};
use crate::rational::int;

const ITEM_NAMES: [&str; 10] = ["bed", "sofa", "table", "chair", "lamp", "books", "computer", "clothes", "fridge", "fan"];

/// Agents own items; an agent owns exactly the items listed in its utility map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KpInstance {
    pub agents: Vec<String>,
    pub items: Vec<String>,
    /// Space units per item.
    pub space: IndexMap<String, i64>,
    /// Utility units per (agent, item).
    pub utility: IndexMap<String, IndexMap<String, i64>>,
    #[serde(rename = "depotCapacity")]
    pub depot_capacity: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl KpInstance {
    pub(super) fn generate(agents: usize, items: usize, seed: u64, rng: &mut impl Rng) -> Self {
        let agents = agent_names(agents);
        let items: Vec<String> = (0..items)
            .map(|i| ITEM_NAMES.get(i).map_or_else(|| format!("item{}", i + 1), |s| s.to_string()))
            .collect();
        let space: IndexMap<String, i64> = items.iter().map(|i| (i.clone(), rng.random_range(1..=10))).collect();
        let utility = agents
            .iter()
            .map(|a| (a.clone(), items.iter().map(|i| (i.clone(), rng.random_range(1..=5))).collect()))
            .collect();
        let total: i64 = agents.len() as i64 * space.values().sum::<i64>();
        // At least the smallest item fits, so the optimum is positive.
        let smallest = space.values().copied().min().unwrap_or(1);
        let depot_capacity = ceil_div(3 * total, 10).max(smallest);
        KpInstance { agents, items, space, utility, depot_capacity, seed: Some(seed) }
    }

    fn validate(&self) -> Result<(), DomainError> {
        check_unique(&self.agents, "agent")?;
        check_unique(&self.items, "item")?;
        for item in &self.items {
            if !self.space.contains_key(item) {
                return Err(DomainError::InvalidInstance(format!("item {item:?} has no space")));
            }
        }
        for (agent, owned) in &self.utility {
            if !self.agents.contains(agent) {
                return Err(DomainError::InvalidInstance(format!("utility for unknown agent {agent:?}")));
            }
            if let Some(item) = owned.keys().find(|i| !self.space.contains_key(*i)) {
                return Err(DomainError::InvalidInstance(format!("{agent:?} owns unknown item {item:?}")));
            }
        }
        Ok(())
    }

    /// x[a][i] per owned item, one capacity row; with `fair`, an integer
    /// minItems bounded by every agent's included-item count and added to
    /// the objective.
    pub(super) fn build(&self, fair: bool) -> Result<(Model, Vec<VarRole>), DomainError> {
        self.validate()?;
        let mut b = ModelBuilder::new(self.agents.clone());
        let mut roles = Vec::new();
        let mut capacity = Vec::new();
        let mut per_agent: Vec<Vec<usize>> = vec![Vec::new(); self.agents.len()];
        for (ai, agent) in self.agents.iter().enumerate() {
            let Some(owned) = self.utility.get(agent) else { continue };
            for item in self.items.iter().filter(|i| owned.contains_key(*i)) {
                let v = b.add_binary(format!("x[{agent}][{item}]"), true, vec![ai]);
                b.add_objective_term(v, int(owned[item]));
                capacity.push((v, int(self.space[item])));
                per_agent[ai].push(v);
                roles.push(VarRole::Item { agent: agent.clone(), item: item.clone() });
            }
        }
        b.add_constraint(capacity, Relation::Le, int(self.depot_capacity));
        if fair {
            let most = per_agent.iter().map(Vec::len).max().unwrap_or(0) as i64;
            let m = b.add_var("minItems", VarKind::Integer, int(0), int(most), false, vec![]);
            b.add_objective_term(m, int(1));
            roles.push(VarRole::MinItems);
            for vars in &per_agent {
                let mut terms: Vec<_> = vars.iter().map(|v| (*v, int(1))).collect();
                terms.push((m, int(-1)));
                b.add_constraint(terms, Relation::Ge, int(0));
            }
        }
        let domain = if fair { "kp-fair" } else { "kp" };
        Ok((b.build(Sense::Maximize, Metadata::domain(domain))?, roles))
    }
}
