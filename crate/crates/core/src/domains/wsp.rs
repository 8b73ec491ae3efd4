use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{agent_names, ceil_div, check_unique, numbered, DomainError, VarRole};
use crate::model::{Metadata, Model, ModelBuilder, Relation, Sense};
use crate::rational::int;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairAffinity {
    pub first: String,
    pub second: String,
    /// Affinity units.
    pub affinity: i64,
}

/// Pairs are unordered and listed once, `first` before `second` in agent order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WspInstance {
    pub agents: Vec<String>,
    pub tables: Vec<String>,
    /// Seats per table.
    pub capacity: IndexMap<String, i64>,
    pub pairs: Vec<PairAffinity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl WspInstance {
    pub(super) fn generate(agents: usize, tables: usize, seed: u64, rng: &mut impl Rng) -> Self {
        let agents = agent_names(agents);
        let tables = numbered("T", tables);
        let mut pairs = Vec::new();
        for i in 0..agents.len() {
            for j in i + 1..agents.len() {
                pairs.push(PairAffinity {
                    first: agents[i].clone(),
                    second: agents[j].clone(),
                    affinity: rng.random_range(1..=10),
                });
            }
        }
        let seats = ceil_div(agents.len() as i64, tables.len() as i64) + 1;
        let capacity = tables.iter().map(|t| (t.clone(), seats)).collect();
        WspInstance { agents, tables, capacity, pairs, seed: Some(seed) }
    }

    fn index_of(&self, agent: &str) -> Result<usize, DomainError> {
        self.agents
            .iter()
            .position(|a| a == agent)
            .ok_or_else(|| DomainError::InvalidInstance(format!("pair mentions unknown agent {agent:?}")))
    }

    fn validate(&self) -> Result<Vec<(usize, usize)>, DomainError> {
        check_unique(&self.agents, "agent")?;
        check_unique(&self.tables, "table")?;
        if let Some(t) = self.tables.iter().find(|t| !self.capacity.contains_key(*t)) {
            return Err(DomainError::InvalidInstance(format!("no capacity for table {t:?}")));
        }
        let mut seen = std::collections::HashSet::new();
        let mut idx = Vec::with_capacity(self.pairs.len());
        for p in &self.pairs {
            let (i, j) = (self.index_of(&p.first)?, self.index_of(&p.second)?);
            if i >= j || !seen.insert((i, j)) {
                return Err(DomainError::InvalidInstance(format!(
                    "pair ({:?}, {:?}) must be listed once in agent order",
                    p.first, p.second
                )));
            }
            idx.push((i, j));
        }
        Ok(idx)
    }

    /// Seat variables y[a][t] form the solution; pair variables x[a,b][t]
    /// carry the affinity and both agents.
    pub(super) fn build(&self) -> Result<(Model, Vec<VarRole>), DomainError> {
        let pair_idx = self.validate()?;
        let mut b = ModelBuilder::new(self.agents.clone());
        let mut roles = Vec::new();
        let mut y = vec![vec![0; self.tables.len()]; self.agents.len()];
        for (ai, agent) in self.agents.iter().enumerate() {
            for (ti, table) in self.tables.iter().enumerate() {
                y[ai][ti] = b.add_binary(format!("y[{agent}][{table}]"), true, vec![ai]);
                roles.push(VarRole::Seat { agent: agent.clone(), table: table.clone() });
            }
        }
        let mut x = vec![vec![0; self.tables.len()]; self.pairs.len()];
        for (pi, (p, (i, j))) in self.pairs.iter().zip(&pair_idx).enumerate() {
            for (ti, table) in self.tables.iter().enumerate() {
                let v = b.add_binary(format!("x[{},{}][{table}]", p.first, p.second), false, vec![*i, *j]);
                b.add_objective_term(v, int(p.affinity));
                x[pi][ti] = v;
                roles.push(VarRole::Pair { first: p.first.clone(), second: p.second.clone(), table: table.clone() });
            }
        }
        // A pair sits together at most once; "exactly once" would force every
        // pair to share a table.
        for row in &x {
            b.add_constraint(row.iter().map(|v| (*v, int(1))).collect(), Relation::Le, int(1));
        }
        for row in &y {
            b.add_constraint(row.iter().map(|v| (*v, int(1))).collect(), Relation::Eq, int(1));
        }
        for (pi, (i, j)) in pair_idx.iter().enumerate() {
            for ti in 0..self.tables.len() {
                b.add_constraint(vec![(x[pi][ti], int(2)), (y[*i][ti], int(-1)), (y[*j][ti], int(-1))], Relation::Le, int(0));
            }
        }
        for (ti, table) in self.tables.iter().enumerate() {
            b.add_constraint(y.iter().map(|row| (row[ti], int(1))).collect(), Relation::Le, int(self.capacity[table]));
        }
        Ok((b.build(Sense::Maximize, Metadata::domain("wsp"))?, roles))
    }
}
