use std::time::Instant;

use num_traits::{Signed, Zero};

use super::bound::RowBounder;
use super::propagate::{Bounds, Propagator};
use super::{Backend, BranchingRule, SolveError, SolveParams, SolveResult, SolveStats, SolveStatus};
use crate::model::{normalize_sense, Assignment, Model, Relation, VarKind};
use crate::rational::Rational;

/// Depth-first branch-and-bound with fixpoint propagation at every node.
///
/// The search is deterministic: children are explored in a fixed order and
/// an incumbent is only replaced by a strictly better one.
#[derive(Debug, Clone, Copy, Default)]
pub struct BranchAndBound;

impl Backend for BranchAndBound {
    fn solve(&self, model: &Model, params: &SolveParams) -> Result<SolveResult, SolveError> {
        params.validate()?;
        let started = Instant::now();
        let normalized = normalize_sense(model);
        let search = Search::new(&normalized.model, params);
        let outcome = search.run(started)?;
        let assignment = outcome.incumbent.map(|(a, _)| a);
        let objective = assignment.as_ref().map(|a| model.evaluate_objective(a)).transpose()?;
        let status = match (&assignment, outcome.exhausted) {
            (_, false) => SolveStatus::TimedOut,
            (Some(_), true) => SolveStatus::Optimal,
            (None, true) => SolveStatus::Infeasible,
        };
        Ok(SolveResult {
            status,
            assignment,
            objective,
            stats: SolveStats { nodes: outcome.nodes, fixings: outcome.fixings, wall_seconds: started.elapsed().as_secs_f64() },
        })
    }
}

struct Outcome {
    incumbent: Option<(Assignment, Rational)>,
    exhausted: bool,
    nodes: u64,
    fixings: u64,
}

struct Search<'a> {
    model: &'a Model,
    params: &'a SolveParams,
    propagator: Propagator<'a>,
    coefs: Vec<Rational>,
    continuous: Vec<usize>,
    /// Rows that mention two or more continuous variables.
    coupled_continuous: bool,
}

enum Completion {
    Feasible(Assignment, Rational),
    Failed,
    /// All integers are fixed yet continuous values cannot be settled
    /// row by row.
    Undetermined,
}

impl<'a> Search<'a> {
    fn new(model: &'a Model, params: &'a SolveParams) -> Self {
        let integral: Vec<bool> = model.variables().iter().map(|v| v.kind.is_integral()).collect();
        let coupled_continuous = model.constraints().iter().any(|row| {
            row.terms.iter().filter(|(v, _)| !integral[*v]).count() > 1
        });
        Search {
            model,
            params,
            propagator: Propagator::new(model.constraints(), integral.clone()),
            coefs: model.objective_coefficients(),
            continuous: (0..model.num_vars()).filter(|v| !integral[*v]).collect(),
            coupled_continuous,
        }
    }

    fn branching_order(&self, bounder: &RowBounder) -> Vec<usize> {
        let mut order: Vec<usize> =
            self.model.variables().iter().filter(|v| v.kind.is_integral()).map(|v| v.id).collect();
        let solution_first = self.params.branching == BranchingRule::SolutionFirst;
        order.sort_by(|a, b| {
            let (va, vb) = (self.model.variable(*a), self.model.variable(*b));
            let group = |s: bool| if solution_first && !s { 1 } else { 0 };
            group(va.is_solution)
                .cmp(&group(vb.is_solution))
                .then_with(|| bounder.effective_coefficient(*b).abs().cmp(&bounder.effective_coefficient(*a).abs()))
                .then_with(|| a.cmp(b))
        });
        order
    }

    fn run(&self, started: Instant) -> Result<Outcome, SolveError> {
        let (lower, upper) = self.model.bounds();
        let mut root = Bounds::new(lower, upper);
        let mut outcome = Outcome { incumbent: None, exhausted: true, nodes: 0, fixings: 0 };
        match self.propagator.run(&mut root, 0..self.model.constraints().len()) {
            Ok(f) => outcome.fixings += f as u64,
            Err(_) => return Ok(outcome),
        }
        let bounder = RowBounder::new(self.model, &root);
        let order = self.branching_order(&bounder);
        let prefer_upper: Vec<bool> =
            (0..self.model.num_vars()).map(|v| bounder.effective_coefficient(v) >= Rational::zero()).collect();
        let integral_objective = bounder.integral_objective();

        // Each entry carries the variable whose bounds changed since the
        // parent was propagated.
        let mut stack: Vec<(Bounds, Option<usize>)> = vec![(root, None)];
        while let Some((mut bounds, changed)) = stack.pop() {
            if outcome.nodes & 63 == 0 && started.elapsed().as_secs_f64() > self.params.time_limit {
                outcome.exhausted = false;
                break;
            }
            if self.params.node_limit.is_some_and(|limit| outcome.nodes >= limit) {
                outcome.exhausted = false;
                break;
            }
            outcome.nodes += 1;
            if let Some(v) = changed {
                match self.propagator.run(&mut bounds, self.propagator.rows_of(v).iter().copied()) {
                    Ok(f) => outcome.fixings += f as u64,
                    Err(_) => continue,
                }
            }
            let Some(mut bound) = bounder.bound(self.model, &bounds) else {
                continue;
            };
            if integral_objective {
                bound = bound.floor();
            }
            if let Some((_, best)) = &outcome.incumbent {
                if bound <= *best {
                    continue;
                }
            }
            let branch_var = order.iter().copied().find(|v| !bounds.is_fixed(*v));
            match self.complete(&bounds, &prefer_upper) {
                Completion::Feasible(assignment, value) => {
                    let improves = outcome.incumbent.as_ref().is_none_or(|(_, best)| value > *best);
                    if improves {
                        outcome.incumbent = Some((assignment, value));
                    }
                    if value >= bound {
                        continue;
                    }
                }
                Completion::Undetermined if branch_var.is_none() => {
                    return Err(SolveError::UnsupportedModel(
                        "continuous variables are not determined once all integer variables are fixed".into(),
                    ));
                }
                _ => {}
            }
            let Some(v) = branch_var else {
                continue;
            };
            let (lo, hi) = (bounds.lower[v], bounds.upper[v]);
            let one = Rational::from_integer(1);
            let (first, rest) = if prefer_upper[v] { (hi, (lo, hi - one)) } else { (lo, (lo + one, hi)) };
            let mut other = bounds.clone();
            other.lower[v] = rest.0;
            other.upper[v] = rest.1;
            stack.push((other, Some(v)));
            bounds.fix(v, first);
            stack.push((bounds, Some(v)));
        }
        Ok(outcome)
    }

    /// Integer variables take their fixed or preferred bound; continuous
    /// variables take their objective-best value within the rows they sit in.
    fn complete(&self, bounds: &Bounds, prefer_upper: &[bool]) -> Completion {
        let model = self.model;
        let mut values: Vec<Rational> = (0..model.num_vars())
            .map(|v| if prefer_upper[v] { bounds.upper[v] } else { bounds.lower[v] })
            .collect();
        let all_fixed = model.variables().iter().all(|v| !v.kind.is_integral() || bounds.is_fixed(v.id));
        for &z in &self.continuous {
            let (mut lo, mut hi) = (bounds.lower[z], bounds.upper[z]);
            for &r in self.propagator.rows_of(z) {
                let row = &model.constraints()[r];
                let mut coef = Rational::zero();
                let mut rest = Rational::zero();
                for (v, a) in &row.terms {
                    if *v == z {
                        coef = *a;
                    } else if model.variable(*v).kind == VarKind::Continuous {
                        return if all_fixed && self.coupled_continuous { Completion::Undetermined } else { Completion::Failed };
                    } else {
                        rest += *a * values[*v];
                    }
                }
                if coef.is_zero() {
                    continue;
                }
                let limit = (row.rhs - rest) / coef;
                let (caps_above, caps_below) = match row.relation {
                    Relation::Eq => (true, true),
                    Relation::Le => (coef > Rational::zero(), coef < Rational::zero()),
                    Relation::Ge => (coef < Rational::zero(), coef > Rational::zero()),
                };
                if caps_above {
                    hi = hi.min(limit);
                }
                if caps_below {
                    lo = lo.max(limit);
                }
            }
            if lo > hi {
                return Completion::Failed;
            }
            values[z] = if self.coefs[z] > Rational::zero() { hi } else { lo };
        }
        for row in model.constraints() {
            if row.slack(&values) < Rational::zero() {
                return Completion::Failed;
            }
        }
        let value = self.coefs.iter().zip(&values).map(|(c, x)| *c * *x).sum();
        Completion::Feasible(Assignment::new(values), value)
    }
}
