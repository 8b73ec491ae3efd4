use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::VarRole;
use crate::hcmaop::Property;
use crate::model::{Assignment, Model};
use crate::rational::int;

/// "Why is this askable variable zero?"
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: usize,
    pub variable: String,
    pub prompt: String,
}

impl Question {
    /// The property that fixes the variable to 1.
    pub fn property(&self) -> Property {
        Property::fix(self.id, int(1), self.prompt.clone())
    }
}

/// One question per askable variable at zero, by variable id. Askable means
/// a solution variable or a WSP pair variable.
pub fn enumerate_questions(model: &Model, roles: &[VarRole], solution: &Assignment) -> Vec<Question> {
    model
        .variables()
        .iter()
        .zip(roles)
        .filter(|(v, role)| {
            (v.is_solution || matches!(role, VarRole::Pair { .. })) && role.is_askable() && solution.get(v.id) == int(0)
        })
        .map(|(v, role)| Question { id: v.id, variable: v.name.clone(), prompt: role.prompt() })
        .collect()
}

/// Uniform sample of `k` questions without replacement, kept in their
/// original order.
pub fn sample_questions(questions: &[Question], k: usize, seed: u64) -> Vec<Question> {
    if k >= questions.len() {
        return questions.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, questions.len(), k).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| questions[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{fixture, generate_instance, Domain, SizeParams};
    use crate::solver::{solve, SolveParams};

    fn solved(inst: &crate::domains::Instance) -> (Model, Vec<VarRole>, Assignment) {
        let (m, roles) = inst.build().unwrap();
        let a = solve(&m, &SolveParams::default()).unwrap().assignment.unwrap();
        (m, roles, a)
    }

    #[test]
    fn kp_micro_has_one_question() {
        let (m, roles, a) = solved(&fixture("kp-micro").unwrap());
        let qs = enumerate_questions(&m, &roles, &a);
        assert_eq!(qs.len(), 1);
        assert_eq!(qs[0].prompt, "Why was Alice's bed not included in the depot?");
        assert_eq!(qs[0].variable, "x[Alice][bed]");
    }

    #[test]
    fn tap_question_count() {
        let inst = generate_instance(Domain::Tap, &SizeParams::tap(3, 5), 4).unwrap();
        let (m, roles, a) = solved(&inst);
        assert_eq!(enumerate_questions(&m, &roles, &a).len(), 3 * 5 - 5);
    }

    #[test]
    fn all_ones_gives_no_questions() {
        let (m, roles, _) = solved(&fixture("kp-micro").unwrap());
        assert!(enumerate_questions(&m, &roles, &Assignment::new(vec![int(1); 3])).is_empty());
    }

    #[test]
    fn wsp_pairs_are_askable() {
        let inst = generate_instance(Domain::Wsp, &SizeParams::wsp(4, 2), 1).unwrap();
        let (m, roles, a) = solved(&inst);
        let qs = enumerate_questions(&m, &roles, &a);
        assert!(qs.iter().any(|q| q.variable.starts_with("x[")));
        assert!(qs.iter().any(|q| q.variable.starts_with("y[")));
    }

    #[test]
    fn sampling_rules() {
        let qs: Vec<Question> =
            (0..30).map(|i| Question { id: i, variable: format!("v{i}"), prompt: String::new() }).collect();
        let a = sample_questions(&qs, 10, 1);
        assert_eq!(a, sample_questions(&qs, 10, 1));
        assert_eq!(a.len(), 10);
        assert!(a.windows(2).all(|w| w[0].id < w[1].id));
        assert!(sample_questions(&qs, 0, 1).is_empty());
        assert_eq!(sample_questions(&qs, 40, 1), qs);
    }
}
