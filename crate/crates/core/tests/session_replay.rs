use cmaoe_core::domains::{Domain, GenSpec, SizeParams};
use cmaoe_core::session::{create_session, AskRequest, SessionSource};
use cmaoe_core::{SolveParams, Variant};

#[test]
fn replaying_history_reproduces_every_explanation() {
    for (domain, size) in [
        (Domain::Kp, SizeParams::kp(3, 5)),
        (Domain::Tap, SizeParams::tap(3, 5)),
        (Domain::Wsp, SizeParams::wsp(4, 2)),
        (Domain::Cvrp, SizeParams::cvrp(3, 1)),
    ] {
        let source = SessionSource::GenSpec(GenSpec { domain, size, seed: 3, fixture: None });
        let params = SolveParams::default();
        let mut session = create_session(&source, &params).unwrap();
        for (i, q) in session.questions().iter().take(4).enumerate() {
            let variant = if i % 2 == 0 { Variant::Q } else { Variant::C };
            let request = AskRequest { variable: q.variable.clone(), variant: Some(variant), ..Default::default() };
            // Infeasible properties are not recorded.
            let _ = session.ask(&request);
        }
        assert!(!session.history.is_empty(), "{domain}");
        assert!(session.history.iter().all(|h| session.model.var_id(&h.question.variable).is_some()));

        let mut fresh = create_session(&source, &params).unwrap();
        for entry in &session.history {
            let request =
                AskRequest { variable: entry.question.variable.clone(), variant: Some(entry.variant), ..Default::default() };
            let replayed = fresh.ask(&request).unwrap();
            assert_eq!(replayed.explanation, entry.response.explanation);
            assert_eq!(replayed.s_prime, entry.response.s_prime);
            assert_eq!(replayed.rendered, entry.response.rendered);
        }
    }
}
