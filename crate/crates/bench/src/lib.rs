//! Workloads shared by the criterion benches.

use cmaoe_core::domains::{enumerate_questions, fixture, generate_instance, Domain, Question, SizeParams};
use cmaoe_core::{solve, Assignment, Model, SolveParams};

/// A solved base problem and its askable questions.
pub struct Workload {
    pub name: String,
    pub model: Model,
    pub solution: Assignment,
    pub questions: Vec<Question>,
}

fn solved(name: String, instance: cmaoe_core::domains::Instance) -> Workload {
    let (model, roles) = instance.build().expect("workload instances build");
    let solution = solve(&model, &SolveParams::default())
        .expect("workload models solve")
        .assignment
        .expect("workload models are feasible");
    let questions = enumerate_questions(&model, &roles, &solution);
    Workload { name, model, solution, questions }
}

pub fn fixture_workload(name: &str) -> Workload {
    solved(name.to_string(), fixture(name).expect("shipped fixture"))
}

/// The smallest rung of each default ladder.
pub fn ladder_workloads() -> Vec<Workload> {
    [
        (Domain::Kp, SizeParams::kp(4, 10)),
        (Domain::Tap, SizeParams::tap(5, 10)),
        (Domain::Wsp, SizeParams::wsp(6, 3)),
        (Domain::Cvrp, SizeParams::cvrp(4, 2)),
    ]
    .into_iter()
    .map(|(domain, size)| {
        let instance = generate_instance(domain, &size, 0).expect("ladder sizes are valid");
        solved(format!("{domain}-{}", size.scale(domain)), instance)
    })
    .collect()
}
