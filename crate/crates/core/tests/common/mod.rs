#![allow(dead_code)]

use cmaoe_core::domains::{generate_instance, Domain, Instance, SizeParams, VarRole};
use cmaoe_core::model::{LinearConstraint, Relation, Sense};
use cmaoe_core::rational::int;
use cmaoe_core::solver::brute_force;
use cmaoe_core::{solve, Assignment, Model, Rational, SolveParams, SolveStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Oracle-sized instance shapes; every model stays within the brute-force
/// budget even after z variables are added (z is continuous).
pub fn oracle_size(domain: Domain, rng: &mut impl Rng) -> SizeParams {
    match domain {
        Domain::Kp => SizeParams::kp(rng.random_range(2..=4), rng.random_range(2..=4)),
        Domain::KpFair => SizeParams::kp(rng.random_range(2..=4), rng.random_range(2..=4)),
        Domain::Tap => SizeParams::tap(rng.random_range(2..=3), rng.random_range(3..=5)),
        Domain::Wsp => SizeParams::wsp(rng.random_range(3..=4), 2),
        Domain::Cvrp => {
            let points = rng.random_range(2..=4);
            let vehicles = if points <= 2 { rng.random_range(1..=2) } else { 1 };
            SizeParams::cvrp(points, vehicles)
        }
    }
}

pub fn oracle_instance(domain: Domain, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let size = oracle_size(domain, &mut rng);
    generate_instance(domain, &size, seed).expect("oracle sizes are valid")
}

pub fn build(instance: &Instance) -> (Model, Vec<VarRole>) {
    instance.build().expect("generated instances build")
}

pub fn solved(model: &Model) -> Assignment {
    let r = solve(model, &SolveParams::default()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    r.assignment.unwrap()
}

pub fn fix_one(model: &Model, var: usize) -> Model {
    model.with_constraints([LinearConstraint::new(vec![(var, int(1))], Relation::Eq, int(1))]).unwrap()
}

/// Optimum of the base model with `var` fixed to 1, by enumeration.
pub fn constrained_optimum(model: &Model, var: usize) -> Option<Rational> {
    let r = brute_force(&fix_one(model, var)).unwrap();
    r.objective
}

/// Minimum Hamming distance to `s` over solutions with `var` = 1, by
/// enumeration. Solution variables must be binary.
pub fn min_changes(model: &Model, s: &Assignment, var: usize) -> Option<Rational> {
    let fixed = fix_one(model, var);
    // |x − s| = x when s = 0 and 1 − x when s = 1; the constants are added back.
    let mut objective = Vec::new();
    let mut constant = int(0);
    for v in model.solution_vars() {
        assert!(v.lower == int(0) && v.upper == int(1));
        if s.get(v.id) == int(0) {
            objective.push((v.id, int(1)));
        } else {
            objective.push((v.id, int(-1)));
            constant += int(1);
        }
    }
    let r = brute_force(&fixed.with_objective(objective, Sense::Minimize).unwrap()).unwrap();
    r.objective.map(|o| o + constant)
}

/// Larger is better after this.
pub fn adjusted(model: &Model, q: Rational) -> Rational {
    match model.sense() {
        Sense::Maximize => q,
        Sense::Minimize => -q,
    }
}
