use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{agent_names, ceil_div, check_unique, numbered, DomainError, VarRole};
use crate::model::{Metadata, Model, ModelBuilder, Relation, Sense};
use crate::rational::int;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TapInstance {
    pub agents: Vec<String>,
    pub tasks: Vec<String>,
    /// Utility units per (agent, task).
    pub utility: IndexMap<String, IndexMap<String, i64>>,
    /// Maximum number of tasks per agent.
    pub workload: IndexMap<String, i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl TapInstance {
    pub(super) fn generate(agents: usize, tasks: usize, seed: u64, rng: &mut impl Rng) -> Self {
        let agents = agent_names(agents);
        let tasks = numbered("T", tasks);
        let utility = agents
            .iter()
            .map(|a| (a.clone(), tasks.iter().map(|t| (t.clone(), rng.random_range(1..=10))).collect()))
            .collect();
        let load = ceil_div(tasks.len() as i64, agents.len() as i64) + 1;
        let workload = agents.iter().map(|a| (a.clone(), load)).collect();
        TapInstance { agents, tasks, utility, workload, seed: Some(seed) }
    }

    fn validate(&self) -> Result<(), DomainError> {
        check_unique(&self.agents, "agent")?;
        check_unique(&self.tasks, "task")?;
        for a in &self.agents {
            let row = self.utility.get(a).ok_or_else(|| DomainError::InvalidInstance(format!("no utility row for {a:?}")))?;
            if let Some(t) = self.tasks.iter().find(|t| !row.contains_key(*t)) {
                return Err(DomainError::InvalidInstance(format!("no utility for ({a:?}, {t:?})")));
            }
            if !self.workload.contains_key(a) {
                return Err(DomainError::InvalidInstance(format!("no workload for {a:?}")));
            }
        }
        Ok(())
    }

    pub(super) fn build(&self) -> Result<(Model, Vec<VarRole>), DomainError> {
        self.validate()?;
        let mut b = ModelBuilder::new(self.agents.clone());
        let mut roles = Vec::new();
        let mut x = vec![vec![0; self.tasks.len()]; self.agents.len()];
        for (ai, agent) in self.agents.iter().enumerate() {
            for (ti, task) in self.tasks.iter().enumerate() {
                let v = b.add_binary(format!("x[{agent}][{task}]"), true, vec![ai]);
                b.add_objective_term(v, int(self.utility[agent][task]));
                x[ai][ti] = v;
                roles.push(VarRole::Task { agent: agent.clone(), task: task.clone() });
            }
        }
        for (ai, agent) in self.agents.iter().enumerate() {
            b.add_constraint(x[ai].iter().map(|v| (*v, int(1))).collect(), Relation::Le, int(self.workload[agent]));
        }
        for ti in 0..self.tasks.len() {
            b.add_constraint(x.iter().map(|row| (row[ti], int(1))).collect(), Relation::Eq, int(1));
        }
        Ok((b.build(Sense::Maximize, Metadata::domain("tap"))?, roles))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn utilities_stay_in_range_over_many_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let inst = TapInstance::generate(10, 100, 11, &mut rng);
        let all: Vec<i64> = inst.utility.values().flat_map(|r| r.values().copied()).collect();
        assert_eq!(all.len(), 1000);
        assert!(all.iter().all(|u| (1..=10).contains(u)));
        assert!(inst.workload.values().all(|w| *w == 11));
    }

    #[test]
    fn counts() {
        let inst = TapInstance::generate(3, 5, 0, &mut ChaCha8Rng::seed_from_u64(0));
        let (m, _) = inst.build().unwrap();
        assert_eq!((m.num_vars(), m.constraints().len()), (15, 8));
    }
}
