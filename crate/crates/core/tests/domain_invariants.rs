//! Structural properties of the generated domain models at optimality.

mod common;

use std::collections::{BTreeSet, HashMap};

use cmaoe_core::domains::{decode_routes, generate_instance, Domain, Instance, SizeParams, VarRole};
use cmaoe_core::model::Relation;
use cmaoe_core::rational::int;
use cmaoe_core::Rational;
use common::{build, solved};

fn sizes(domain: Domain) -> Vec<SizeParams> {
    match domain {
        Domain::Kp => vec![SizeParams::kp(2, 3), SizeParams::kp(4, 6), SizeParams::kp(6, 10)],
        // The fairness term couples all agents and weakens the bound.
        Domain::KpFair => vec![SizeParams::kp(2, 3), SizeParams::kp(3, 5), SizeParams::kp(4, 6)],
        Domain::Tap => vec![SizeParams::tap(2, 3), SizeParams::tap(3, 7), SizeParams::tap(5, 10)],
        Domain::Wsp => vec![SizeParams::wsp(3, 2), SizeParams::wsp(5, 2), SizeParams::wsp(6, 3)],
        Domain::Cvrp => vec![SizeParams::cvrp(2, 1), SizeParams::cvrp(4, 2), SizeParams::cvrp(5, 2), SizeParams::cvrp(6, 2)],
    }
}

fn instances(domain: Domain, per_size: u64) -> impl Iterator<Item = Instance> {
    sizes(domain)
        .into_iter()
        .flat_map(move |size| (0..per_size).map(move |seed| generate_instance(domain, &size, seed).unwrap()))
}

#[test]
fn every_generated_model_has_a_positive_optimum() {
    for domain in Domain::ALL {
        for instance in instances(domain, 4) {
            let (model, _) = build(&instance);
            let s = solved(&model);
            assert!(model.evaluate_objective(&s).unwrap() > int(0), "{domain}");
        }
    }
}

#[test]
fn build_is_pure() {
    for domain in Domain::ALL {
        let instance = generate_instance(domain, &SizeParams::default(), 11).unwrap();
        let a = serde_json::to_string(&build(&instance).0).unwrap();
        let again = generate_instance(domain, &SizeParams::default(), 11).unwrap();
        assert_eq!(instance, again);
        assert_eq!(a, serde_json::to_string(&build(&again).0).unwrap());
        let through_json: Instance = serde_json::from_str(&serde_json::to_string(&instance).unwrap()).unwrap();
        assert_eq!(through_json, instance);
    }
}

#[test]
fn wsp_pairs_sit_together_exactly_when_seated_together() {
    for instance in instances(Domain::Wsp, 5) {
        let (model, roles) = build(&instance);
        let s = solved(&model);
        let mut seat: HashMap<&str, &str> = HashMap::new();
        for (v, role) in roles.iter().enumerate() {
            if let VarRole::Seat { agent, table } = role {
                if s.get(v) == int(1) {
                    assert!(seat.insert(agent, table).is_none(), "{agent} has one seat");
                }
            }
        }
        for (v, role) in roles.iter().enumerate() {
            if let VarRole::Pair { first, second, table } = role {
                let together = seat[first.as_str()] == table && seat[second.as_str()] == table;
                assert_eq!(s.get(v) == int(1), together, "{first},{second} at {table}");
            }
        }
    }
}

#[test]
fn kp_fair_min_items_is_tight() {
    for instance in instances(Domain::KpFair, 5) {
        let (model, roles) = build(&instance);
        let s = solved(&model);
        let mut counts: HashMap<&str, i64> = instance.agents().iter().map(|a| (a.as_str(), 0)).collect();
        let mut min_items = None;
        for (v, role) in roles.iter().enumerate() {
            match role {
                VarRole::Item { agent, .. } => *counts.get_mut(agent.as_str()).unwrap() += (s.get(v) == int(1)) as i64,
                VarRole::MinItems => min_items = Some(s.get(v)),
                _ => {}
            }
        }
        let least = counts.values().min().copied().unwrap();
        assert_eq!(min_items, Some(Rational::from_integer(least)));
    }
}

/// Walks each vehicle's arcs from the depot without using the decoder.
fn walk_routes(roles: &[VarRole], s: &cmaoe_core::Assignment) -> Vec<(String, Vec<String>)> {
    let mut arcs: HashMap<&str, HashMap<&str, &str>> = HashMap::new();
    let mut used: HashMap<&str, usize> = HashMap::new();
    for (v, role) in roles.iter().enumerate() {
        if let VarRole::Leg { from, to, vehicle } = role {
            if s.get(v) == int(1) {
                assert!(arcs.entry(vehicle).or_default().insert(from, to).is_none(), "{vehicle} leaves {from} twice");
                *used.entry(vehicle).or_default() += 1;
            }
        }
    }
    let mut routes = Vec::new();
    for (vehicle, next) in &arcs {
        let mut stops = vec!["Depot".to_string()];
        let mut at = "Depot";
        loop {
            at = next[at];
            stops.push(at.to_string());
            if at == "Depot" {
                break;
            }
            assert!(stops.len() <= next.len() + 1, "{vehicle} loops away from the depot");
        }
        assert_eq!(stops.len() - 1, used[vehicle], "{vehicle} has arcs off its depot tour");
        routes.push((vehicle.to_string(), stops));
    }
    routes.sort();
    routes
}

#[test]
fn cvrp_solutions_are_depot_tours() {
    for instance in instances(Domain::Cvrp, 5) {
        let Instance::Cvrp(cvrp) = &instance else { unreachable!() };
        let (model, roles) = build(&instance);
        let s = solved(&model);
        let walked = walk_routes(&roles, &s);
        let mut visits: HashMap<&str, usize> = HashMap::new();
        for (_, stops) in &walked {
            for p in &stops[1..stops.len() - 1] {
                *visits.entry(p.as_str()).or_default() += 1;
            }
            let inner: BTreeSet<_> = stops[1..stops.len() - 1].iter().collect();
            assert_eq!(inner.len(), stops.len() - 2, "no repeated point");
        }
        for p in &cvrp.points[1..] {
            assert_eq!(visits.get(p.as_str()), Some(&1), "{p} covered once");
        }
        let mut decoded: Vec<_> = decode_routes(cvrp, &model, &s).unwrap().into_iter().map(|r| (r.vehicle, r.stops)).collect();
        decoded.sort();
        assert_eq!(decoded, walked);
    }
}

#[test]
fn cvrp_has_one_subtour_row_per_nonempty_subset() {
    for m in 1..=6 {
        let instance = generate_instance(Domain::Cvrp, &SizeParams::cvrp(m, 1), 0).unwrap();
        let (model, roles) = build(&instance);
        let mut subsets = BTreeSet::new();
        for row in model.constraints().iter().filter(|r| r.relation == Relation::Ge) {
            assert_eq!(row.rhs, int(1));
            let inside: BTreeSet<String> = row
                .terms
                .iter()
                .map(|(v, _)| match &roles[*v] {
                    VarRole::Leg { from, .. } => from.clone(),
                    other => panic!("subtour row over {other:?}"),
                })
                .collect();
            assert!(!inside.contains("Depot"));
            assert!(subsets.insert(inside));
        }
        assert_eq!(subsets.len(), (1 << m) - 1, "m = {m}");
    }
}
