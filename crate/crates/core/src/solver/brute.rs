use std::time::Instant;

use num_traits::Zero;

use super::{SolveError, SolveResult, SolveStats, SolveStatus};
use crate::model::{Assignment, Model, Relation, VarKind};
use crate::rational::Rational;

/// Maximum number of integer-kind variables [`brute_force`] will enumerate.
pub const BRUTE_FORCE_BUDGET: usize = 22;

/// Enumerates every integral assignment in lexicographic order and returns
/// the best feasible one; among equal objectives the lexicographically
/// smallest assignment wins.
///
/// Partial assignments are abandoned as soon as some row can no longer be
/// met for any values of the remaining variables, which keeps the oracle
/// usable on equality-heavy models without changing what it returns.
pub fn brute_force(model: &Model) -> Result<SolveResult, SolveError> {
    let started = Instant::now();
    let ints: Vec<usize> = model.variables().iter().filter(|v| v.kind.is_integral()).map(|v| v.id).collect();
    if ints.len() > BRUTE_FORCE_BUDGET {
        return Err(SolveError::TooLarge(ints.len()));
    }
    let domain: f64 = ints.iter().map(|v| {
        let var = model.variable(*v);
        (var.upper - var.lower).to_integer() as f64 + 1.0
    }).product();
    if domain > (1u64 << BRUTE_FORCE_BUDGET) as f64 {
        return Err(SolveError::TooLarge(ints.len()));
    }
    for row in model.constraints() {
        let continuous = row.terms.iter().filter(|(v, _)| model.variable(*v).kind == VarKind::Continuous).count();
        if continuous > 1 {
            return Err(SolveError::UnsupportedModel("row couples several continuous variables".into()));
        }
    }

    let mut rows_of = vec![Vec::new(); model.num_vars()];
    for (ri, row) in model.constraints().iter().enumerate() {
        for (v, _) in &row.terms {
            rows_of[*v].push(ri);
        }
    }
    let mut state = Enumeration {
        model,
        ints: &ints,
        rows_of: &rows_of,
        assigned: vec![false; model.num_vars()],
        values: model.variables().iter().map(|v| v.lower).collect(),
        best: None,
        leaves: 0,
    };
    state.descend(0)?;
    let leaves = state.leaves;
    let (status, assignment, objective) = match state.best {
        Some((a, q)) => (SolveStatus::Optimal, Some(a), Some(q)),
        None => (SolveStatus::Infeasible, None, None),
    };
    Ok(SolveResult {
        status,
        assignment,
        objective,
        stats: SolveStats { nodes: leaves, fixings: 0, wall_seconds: started.elapsed().as_secs_f64() },
    })
}

struct Enumeration<'a> {
    model: &'a Model,
    ints: &'a [usize],
    rows_of: &'a [Vec<usize>],
    assigned: Vec<bool>,
    values: Vec<Rational>,
    best: Option<(Assignment, Rational)>,
    leaves: u64,
}

impl Enumeration<'_> {
    fn descend(&mut self, depth: usize) -> Result<(), SolveError> {
        if depth == self.ints.len() {
            self.leaves += 1;
            return self.evaluate_leaf();
        }
        let v = self.ints[depth];
        let var = self.model.variable(v);
        let mut x = var.lower;
        while x <= var.upper {
            self.values[v] = x;
            self.assigned[v] = true;
            if self.rows_of[v].iter().all(|r| self.row_satisfiable(*r)) {
                self.descend(depth + 1)?;
            }
            x += Rational::from_integer(1);
        }
        self.assigned[v] = false;
        self.values[v] = var.lower;
        Ok(())
    }

    fn row_satisfiable(&self, r: usize) -> bool {
        let row = &self.model.constraints()[r];
        let (mut lo, mut hi) = (Rational::zero(), Rational::zero());
        for (v, a) in &row.terms {
            let var = self.model.variable(*v);
            let (l, u) = if self.assigned[*v] { (self.values[*v], self.values[*v]) } else { (var.lower, var.upper) };
            let (p, q) = (*a * l, *a * u);
            lo += p.min(q);
            hi += p.max(q);
        }
        match row.relation {
            Relation::Le => lo <= row.rhs,
            Relation::Ge => hi >= row.rhs,
            Relation::Eq => lo <= row.rhs && row.rhs <= hi,
        }
    }

    fn evaluate_leaf(&mut self) -> Result<(), SolveError> {
        let model = self.model;
        let coefs = model.objective_coefficients();
        let sign = model.sense().sign();
        let mut values = self.values.clone();
        for var in model.variables().iter().filter(|v| v.kind == VarKind::Continuous) {
            let (mut lo, mut hi) = (var.lower, var.upper);
            for r in &self.rows_of[var.id] {
                let row = &model.constraints()[*r];
                let mut coef = Rational::zero();
                let mut rest = Rational::zero();
                for (v, a) in &row.terms {
                    if *v == var.id {
                        coef = *a;
                    } else {
                        rest += *a * values[*v];
                    }
                }
                if coef.is_zero() {
                    continue;
                }
                let limit = (row.rhs - rest) / coef;
                match (row.relation, coef > Rational::zero()) {
                    (Relation::Eq, _) => {
                        lo = lo.max(limit);
                        hi = hi.min(limit);
                    }
                    (Relation::Le, true) | (Relation::Ge, false) => hi = hi.min(limit),
                    (Relation::Le, false) | (Relation::Ge, true) => lo = lo.max(limit),
                }
            }
            if lo > hi {
                return Ok(());
            }
            values[var.id] = if sign * coefs[var.id] > Rational::zero() { hi } else { lo };
        }
        let candidate = Assignment::new(values);
        if !model.check_feasibility(&candidate)?.is_feasible() {
            return Ok(());
        }
        let q = model.evaluate_objective(&candidate)?;
        if self.best.as_ref().is_none_or(|(_, best)| model.sense().better(&q, best)) {
            self.best = Some((candidate, q));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Metadata, ModelBuilder, Sense};
    use crate::rational::int;

    #[test]
    fn infeasible_toy_model() {
        let mut b = ModelBuilder::new(vec![]);
        let x = b.add_binary("x", true, vec![]);
        let y = b.add_binary("y", true, vec![]);
        b.add_constraint(vec![(x, int(1)), (y, int(1))], Relation::Ge, int(3));
        let m = b.build(Sense::Maximize, Metadata::default()).unwrap();
        assert_eq!(brute_force(&m).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn thirty_binaries_exceed_budget() {
        let mut b = ModelBuilder::new(vec![]);
        for i in 0..30 {
            b.add_binary(format!("x{i}"), true, vec![]);
        }
        let m = b.build(Sense::Maximize, Metadata::default()).unwrap();
        assert_eq!(brute_force(&m).unwrap_err(), SolveError::TooLarge(30));
    }

    #[test]
    fn ties_pick_lexicographically_smallest() {
        let mut b = ModelBuilder::new(vec![]);
        let x = b.add_binary("x", true, vec![]);
        let y = b.add_binary("y", true, vec![]);
        b.add_objective_term(x, int(1));
        b.add_objective_term(y, int(1));
        b.add_constraint(vec![(x, int(1)), (y, int(1))], Relation::Le, int(1));
        let m = b.build(Sense::Maximize, Metadata::default()).unwrap();
        assert_eq!(brute_force(&m).unwrap().assignment.unwrap().values, vec![int(0), int(1)]);
    }
}
