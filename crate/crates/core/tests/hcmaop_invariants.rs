//! Hypothetical-problem guarantees, each checked against an independent
//! enumeration that uses no z variables and no weights.

mod common;

use cmaoe_core::domains::{enumerate_questions, Domain};
use cmaoe_core::explain::hamming;
use cmaoe_core::hcmaop::{build_hcmaop, derive_weights, solve_hcmaop, HcmaopError, Hypothetical, Variant};
use cmaoe_core::model::normalize_sense;
use cmaoe_core::rational::int;
use cmaoe_core::SolveParams;
use common::{adjusted, build, constrained_optimum, min_changes, oracle_instance, solved};
use num_traits::Signed;

const INSTANCES: u64 = 40;

fn hypothetical(model: &cmaoe_core::Model, s: &cmaoe_core::Assignment, q: &cmaoe_core::domains::Question, v: Variant) -> Result<Hypothetical, HcmaopError> {
    let h = build_hcmaop(model, s, &q.property(), derive_weights(model, v)?)?;
    let out = solve_hcmaop(&h, &SolveParams::default())?;
    // z-tightness on the derived optimum.
    let derived = out.result.assignment.as_ref().unwrap();
    for (x, z) in &h.z_vars {
        assert_eq!(derived.get(*z), (derived.get(*x) - s.get(*x)).abs(), "z of {}", model.variable(*x).name);
    }
    Ok(out)
}

fn check_domain(domain: Domain) {
    let mut checked = 0;
    for seed in 0..INSTANCES {
        let (model, roles) = build(&oracle_instance(domain, seed));
        let s = solved(&model);
        let q_s = model.evaluate_objective(&s).unwrap();
        for q in enumerate_questions(&model, &roles, &s).iter().take(4) {
            let (qv, cv) = (hypothetical(&model, &s, q, Variant::Q), hypothetical(&model, &s, q, Variant::C));
            let (sq, sc) = match (qv, cv) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(HcmaopError::PropertyInfeasible(_)), Err(HcmaopError::PropertyInfeasible(_))) => {
                    assert_eq!(constrained_optimum(&model, q.id), None);
                    continue;
                }
                other => panic!("{domain} seed {seed}: {other:?}"),
            };
            for h in [&sq, &sc] {
                assert_eq!(h.assignment.get(q.id), int(1), "property holds");
                assert!(model.check_feasibility(&h.assignment).unwrap().is_feasible());
                assert!(adjusted(&model, h.quality) <= adjusted(&model, q_s), "never better than S");
                assert_eq!(h.changes, hamming(&model, &s, &h.assignment));
            }
            assert_eq!(Some(sq.quality), constrained_optimum(&model, q.id), "Q is quality-optimal");
            assert_eq!(Some(sc.changes), min_changes(&model, &s, q.id), "C is change-optimal");
            assert!(adjusted(&model, sq.quality) >= adjusted(&model, sc.quality));
            assert!(sc.changes <= sq.changes);
            checked += 1;
        }
    }
    assert!(checked >= INSTANCES as usize, "{domain}: only {checked} questions checked");
}

#[test]
fn kp_variants_are_lexicographic() {
    check_domain(Domain::Kp);
}

#[test]
fn kp_fair_variants_are_lexicographic() {
    check_domain(Domain::KpFair);
}

#[test]
fn tap_variants_are_lexicographic() {
    check_domain(Domain::Tap);
}

#[test]
fn wsp_variants_are_lexicographic() {
    check_domain(Domain::Wsp);
}

#[test]
fn cvrp_variants_are_lexicographic() {
    check_domain(Domain::Cvrp);
}

#[test]
fn answers_are_deterministic() {
    for domain in [Domain::Kp, Domain::Wsp, Domain::Cvrp] {
        let (model, roles) = build(&oracle_instance(domain, 7));
        let s = solved(&model);
        for q in enumerate_questions(&model, &roles, &s).iter().take(3) {
            for v in [Variant::Q, Variant::C] {
                let a = hypothetical(&model, &s, q, v).ok().map(|h| h.assignment);
                let b = hypothetical(&model, &s, q, v).ok().map(|h| h.assignment);
                assert_eq!(a, b);
            }
        }
    }
}

#[test]
fn sense_flip_keeps_reported_quality() {
    // A min-sense CVRP model and its max-of-negation twin give the same S′
    // quality up to sign.
    for seed in 0..10 {
        let (model, roles) = build(&oracle_instance(Domain::Cvrp, seed));
        let flipped = normalize_sense(&model);
        assert!(flipped.flipped);
        let s = solved(&model);
        assert_eq!(solved(&flipped.model), s);
        for q in enumerate_questions(&model, &roles, &s).iter().take(2) {
            let a = hypothetical(&model, &s, q, Variant::Q);
            let b = hypothetical(&flipped.model, &s, q, Variant::Q);
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    assert_eq!(a.quality, flipped.native_value(b.quality));
                    assert_eq!(a.changes, b.changes);
                }
                (Err(_), Err(_)) => {}
                other => panic!("{other:?}"),
            }
        }
    }
}
