//! Activity-based bound propagation.

use std::collections::VecDeque;

use num_traits::Zero;

use crate::model::{LinearConstraint, Relation};
use crate::rational::Rational;

/// Per-variable interval `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    pub lower: Vec<Rational>,
    pub upper: Vec<Rational>,
}

impl Bounds {
    pub fn new(lower: Vec<Rational>, upper: Vec<Rational>) -> Self {
        debug_assert_eq!(lower.len(), upper.len());
        Bounds { lower, upper }
    }

    pub fn is_fixed(&self, var: usize) -> bool {
        self.lower[var] == self.upper[var]
    }

    pub fn fix(&mut self, var: usize, value: Rational) {
        self.lower[var] = value;
        self.upper[var] = value;
    }

    pub fn contains(&self, values: &[Rational]) -> bool {
        values.iter().enumerate().all(|(i, x)| self.lower[i] <= *x && *x <= self.upper[i])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Propagation {
    Tightened { bounds: Bounds, fixings: usize },
    ProvenInfeasible,
}

/// Tightens `bounds` to a fixpoint of the per-row activity rules. `integral`
/// marks variables whose bounds are rounded inward.
pub fn propagate_bounds(constraints: &[LinearConstraint], integral: &[bool], bounds: Bounds) -> Propagation {
    let propagator = Propagator::new(constraints, integral.to_vec());
    let mut bounds = bounds;
    match propagator.run(&mut bounds, 0..constraints.len()) {
        Ok(fixings) => Propagation::Tightened { bounds, fixings },
        Err(Infeasible) => Propagation::ProvenInfeasible,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Infeasible;

pub(crate) struct Propagator<'a> {
    rows: &'a [LinearConstraint],
    integral: Vec<bool>,
    var_rows: Vec<Vec<usize>>,
}

impl<'a> Propagator<'a> {
    pub(crate) fn new(rows: &'a [LinearConstraint], integral: Vec<bool>) -> Self {
        let mut var_rows = vec![Vec::new(); integral.len()];
        for (ri, row) in rows.iter().enumerate() {
            for (v, _) in &row.terms {
                var_rows[*v].push(ri);
            }
        }
        Propagator { rows, integral, var_rows }
    }

    pub(crate) fn rows_of(&self, var: usize) -> &[usize] {
        &self.var_rows[var]
    }

    /// Propagates starting from the given rows; returns the number of
    /// variables newly fixed.
    pub(crate) fn run(&self, bounds: &mut Bounds, seeds: impl IntoIterator<Item = usize>) -> Result<usize, Infeasible> {
        let mut queued = vec![false; self.rows.len()];
        let mut queue = VecDeque::new();
        for r in seeds {
            if !queued[r] {
                queued[r] = true;
                queue.push_back(r);
            }
        }
        // Continuous bounds can creep towards a limit forever; cap the work.
        let mut budget = 64 * self.rows.len().max(16);
        let mut fixings = 0;
        let mut changed = Vec::new();
        while let Some(r) = queue.pop_front() {
            queued[r] = false;
            if budget == 0 {
                break;
            }
            budget -= 1;
            changed.clear();
            self.tighten_row(&self.rows[r], bounds, &mut changed, &mut fixings)?;
            for v in &changed {
                for &other in &self.var_rows[*v] {
                    if other != r && !queued[other] {
                        queued[other] = true;
                        queue.push_back(other);
                    }
                }
            }
        }
        Ok(fixings)
    }

    fn tighten_row(
        &self,
        row: &LinearConstraint,
        bounds: &mut Bounds,
        changed: &mut Vec<usize>,
        fixings: &mut usize,
    ) -> Result<(), Infeasible> {
        let mut min_act = Rational::zero();
        let mut max_act = Rational::zero();
        for (v, a) in &row.terms {
            let (lo, hi) = (bounds.lower[*v], bounds.upper[*v]);
            if *a > Rational::zero() {
                min_act += *a * lo;
                max_act += *a * hi;
            } else {
                min_act += *a * hi;
                max_act += *a * lo;
            }
        }
        let upper_side = matches!(row.relation, Relation::Le | Relation::Eq);
        let lower_side = matches!(row.relation, Relation::Ge | Relation::Eq);
        if upper_side && min_act > row.rhs {
            return Err(Infeasible);
        }
        if lower_side && max_act < row.rhs {
            return Err(Infeasible);
        }
        // Nothing to tighten when the row cannot become binding.
        let upper_room = row.rhs - min_act;
        let lower_room = row.rhs - max_act;
        let upper_active = upper_side && max_act > row.rhs;
        let lower_active = lower_side && min_act < row.rhs;
        if !upper_active && !lower_active {
            return Ok(());
        }
        for (v, a) in &row.terms {
            let v = *v;
            let (lo, hi) = (bounds.lower[v], bounds.upper[v]);
            if lo == hi || a.is_zero() {
                continue;
            }
            let mut new_lo = lo;
            let mut new_hi = hi;
            if upper_active {
                if *a > Rational::zero() {
                    new_hi = new_hi.min(lo + upper_room / *a);
                } else {
                    new_lo = new_lo.max(hi + upper_room / *a);
                }
            }
            if lower_active {
                if *a > Rational::zero() {
                    new_lo = new_lo.max(hi + lower_room / *a);
                } else {
                    new_hi = new_hi.min(lo + lower_room / *a);
                }
            }
            if self.integral[v] {
                new_lo = new_lo.ceil();
                new_hi = new_hi.floor();
            }
            if new_lo > new_hi {
                return Err(Infeasible);
            }
            if new_lo != lo || new_hi != hi {
                bounds.lower[v] = new_lo;
                bounds.upper[v] = new_hi;
                if new_lo == new_hi {
                    *fixings += 1;
                }
                changed.push(v);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use proptest::prelude::*;

    fn row(coefs: &[i64], relation: Relation, rhs: i64) -> LinearConstraint {
        LinearConstraint::new(coefs.iter().enumerate().map(|(i, c)| (i, int(*c))).collect(), relation, int(rhs))
    }

    fn binaries(n: usize) -> Bounds {
        Bounds::new(vec![int(0); n], vec![int(1); n])
    }

    #[test]
    fn implied_upper_bound_fixes_partner() {
        let rows = [row(&[1, 1], Relation::Le, 1)];
        let mut b = binaries(2);
        b.fix(0, int(1));
        match propagate_bounds(&rows, &[true, true], b) {
            Propagation::Tightened { bounds, fixings } => {
                assert_eq!(bounds.upper[1], int(0));
                assert_eq!(fixings, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn only_satisfying_point_is_forced() {
        let rows = [row(&[2, 3], Relation::Ge, 5)];
        match propagate_bounds(&rows, &[true, true], binaries(2)) {
            Propagation::Tightened { bounds, .. } => {
                assert_eq!(bounds.lower, vec![int(1), int(1)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unreachable_activity_is_infeasible() {
        let rows = [row(&[1, 1], Relation::Ge, 3)];
        assert_eq!(propagate_bounds(&rows, &[true, true], binaries(2)), Propagation::ProvenInfeasible);
    }

    #[test]
    fn continuous_bounds_follow_integer_fixing() {
        // x - z <= 0, -x - z <= 0 with x fixed to 1 gives z >= 1.
        let rows = [row(&[1, -1], Relation::Le, 0), row(&[-1, -1], Relation::Le, 0)];
        let mut b = Bounds::new(vec![int(0), int(0)], vec![int(1), int(1)]);
        b.fix(0, int(1));
        match propagate_bounds(&rows, &[true, false], b) {
            Propagation::Tightened { bounds, .. } => assert_eq!(bounds.lower[1], int(1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        /// Every integral point feasible before propagation stays inside the
        /// tightened box.
        #[test]
        fn propagation_is_sound(
            rows in prop::collection::vec((prop::collection::vec(-4i64..5, 4), -3i64..6, 0u8..3), 1..4),
            fixed in prop::collection::vec(prop::option::of(0i64..2), 4),
        ) {
            let rows: Vec<_> = rows.into_iter().map(|(c, rhs, rel)| {
                row(&c, [Relation::Le, Relation::Eq, Relation::Ge][rel as usize], rhs)
            }).collect();
            let mut start = binaries(4);
            for (i, f) in fixed.iter().enumerate() {
                if let Some(v) = f { start.fix(i, int(*v)); }
            }
            let result = propagate_bounds(&rows, &[true; 4], start.clone());
            for mask in 0u32..16 {
                let point: Vec<Rational> = (0..4).map(|i| int(((mask >> i) & 1) as i64)).collect();
                let feasible = start.contains(&point)
                    && rows.iter().all(|r| r.slack(&point) >= Rational::zero());
                if feasible {
                    match &result {
                        Propagation::Tightened { bounds, .. } => prop_assert!(bounds.contains(&point)),
                        Propagation::ProvenInfeasible => prop_assert!(false, "feasible point {point:?} lost"),
                    }
                }
            }
        }
    }
}
