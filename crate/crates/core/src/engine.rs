//! One question, end to end: hypothetical problem, solve, explanation.

use std::time::Instant;

use crate::explain::{full_explanation, Explanation};
use crate::hcmaop::{build_hcmaop, derive_weights, solve_hcmaop, HcmaopError, Hypothetical, Property, Variant, Weights};
use crate::model::{Assignment, Model};
use crate::solver::SolveParams;

#[derive(Debug, Clone, PartialEq)]
pub struct Answer {
    pub weights: Weights,
    pub hypothetical: Hypothetical,
    pub explanation: Explanation,
    /// Build + solve of the hypothetical problem plus explanation, seconds.
    pub seconds: f64,
}

pub fn answer(
    model: &Model,
    solution: &Assignment,
    property: &Property,
    variant: Variant,
    params: &SolveParams,
) -> Result<Answer, HcmaopError> {
    let started = Instant::now();
    let weights = derive_weights(model, variant)?;
    let hcmaop = build_hcmaop(model, solution, property, weights)?;
    let hypothetical = solve_hcmaop(&hcmaop, params)?;
    let explanation = full_explanation(model, solution, &hypothetical.assignment).map_err(|e| match e {
        crate::explain::ExplainError::Model(m) => HcmaopError::Model(m),
        other => unreachable!("derived assignment has the base layout: {other}"),
    })?;
    Ok(Answer { weights, hypothetical, explanation, seconds: started.elapsed().as_secs_f64() })
}
