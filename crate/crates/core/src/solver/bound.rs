//! Admissible upper bounds for maximization models.
//!
//! [`optimistic_bound`] is the coefficient-sum bound. The search uses
//! [`RowBounder`], which is never weaker: it folds change-tracking continuous
//! variables into the binary they shadow and solves the continuous relaxation
//! of several disjoint-row families exactly, keeping the smallest value.

use std::cmp::Ordering;
use std::collections::HashSet;

use num_traits::Zero;

use super::propagate::Bounds;
use crate::model::{LinearConstraint, Model, Relation, Sense, VarKind};
use crate::rational::Rational;

/// Σ_v max(c_v·l_v, c_v·u_v) over the given bounds. The model must be in
/// maximization sense.
pub fn optimistic_bound(model: &Model, bounds: &Bounds) -> Rational {
    debug_assert_eq!(model.sense(), Sense::Maximize);
    model
        .objective()
        .iter()
        .map(|(v, c)| (*c * bounds.lower[*v]).max(*c * bounds.upper[*v]))
        .sum()
}

const MAX_FAMILIES: usize = 8;
const MAX_FAMILY_SEEDS: usize = 512;

/// A continuous variable z with negative objective weight whose only rows say
/// z ≥ g_k(x) for one integer variable x of unit range. At any optimum z sits
/// at h(x) = max(lb_z, max_k g_k(x)), which is affine on x ∈ {l, l+1}.
struct Fold {
    shadow: usize,
    /// h(l) and h(l+1).
    at_low: Rational,
    at_high: Rational,
}

pub(crate) struct RowBounder {
    /// Objective coefficients after folding.
    effective: Vec<Rational>,
    constant: Rational,
    folded: Vec<bool>,
    families: Vec<Vec<usize>>,
    integral_objective: bool,
}

impl RowBounder {
    pub(crate) fn new(model: &Model, root: &Bounds) -> Self {
        debug_assert_eq!(model.sense(), Sense::Maximize);
        let n = model.num_vars();
        let coefs = model.objective_coefficients();
        let mut var_rows = vec![Vec::new(); n];
        for (ri, row) in model.constraints().iter().enumerate() {
            for (v, _) in &row.terms {
                var_rows[*v].push(ri);
            }
        }

        let mut effective = coefs.clone();
        let mut constant = Rational::zero();
        let mut folded = vec![false; n];
        let mut folds_integral = true;
        for var in model.variables() {
            if var.kind != VarKind::Continuous || coefs[var.id] >= Rational::zero() {
                continue;
            }
            let Some(fold) = fold_for(model, var.id, &var_rows[var.id]) else {
                continue;
            };
            let c = coefs[var.id];
            let low = model.variable(fold.shadow).lower;
            let slope = fold.at_high - fold.at_low;
            effective[var.id] = Rational::zero();
            effective[fold.shadow] += c * slope;
            constant += c * (fold.at_low - slope * low);
            folded[var.id] = true;
            folds_integral &= fold.at_low.is_integer() && fold.at_high.is_integer();
        }

        let integral_objective = folds_integral
            && model.objective().iter().all(|(v, c)| {
                c.is_integer() && (model.variable(*v).kind.is_integral() || folded[*v])
            });

        let mut bounder = RowBounder { effective, constant, folded, families: Vec::new(), integral_objective };
        bounder.families = bounder.select_families(model, root);
        bounder
    }

    /// Whether every subtree optimum is an integer, so bounds may be floored.
    pub(crate) fn integral_objective(&self) -> bool {
        self.integral_objective
    }

    pub(crate) fn effective_coefficient(&self, var: usize) -> Rational {
        self.effective[var]
    }

    fn select_families(&self, model: &Model, root: &Bounds) -> Vec<Vec<usize>> {
        let rows = model.constraints();
        let usable: Vec<usize> = (0..rows.len())
            .filter(|r| rows[*r].terms.len() >= 2 && rows[*r].terms.iter().all(|(v, _)| !self.folded[*v]))
            .collect();
        if usable.is_empty() {
            return Vec::new();
        }
        let mut seen = HashSet::new();
        let mut scored = Vec::new();
        let mut used = vec![false; model.num_vars()];
        for (k, _) in usable.iter().enumerate().take(MAX_FAMILY_SEEDS) {
            used.iter_mut().for_each(|u| *u = false);
            let mut family = Vec::new();
            for r in usable[k..].iter().chain(&usable[..k]) {
                if rows[*r].terms.iter().any(|(v, _)| used[*v]) {
                    continue;
                }
                rows[*r].terms.iter().for_each(|(v, _)| used[*v] = true);
                family.push(*r);
            }
            family.sort_unstable();
            if !seen.insert(family.clone()) {
                continue;
            }
            let value = self.family_bound(rows, &family, root);
            scored.push((value, family));
        }
        // Infeasible families (None) are the strongest possible bounds.
        scored.sort_by(|a, b| match (&a.0, &b.0) {
            (None, None) => Ordering::Equal,
            (None, _) => Ordering::Less,
            (_, None) => Ordering::Greater,
            (Some(x), Some(y)) => x.cmp(y),
        });
        scored.into_iter().take(MAX_FAMILIES).map(|(_, f)| f).collect()
    }

    /// Upper bound on the objective of any feasible integral completion of
    /// `bounds`; `None` when the relaxation is already infeasible.
    pub(crate) fn bound(&self, model: &Model, bounds: &Bounds) -> Option<Rational> {
        let rows = model.constraints();
        if self.families.is_empty() {
            return Some(self.free_bound(bounds, None));
        }
        let mut best: Option<Rational> = None;
        for family in &self.families {
            let value = self.family_bound(rows, family, bounds)?;
            best = Some(match best {
                Some(b) if b <= value => b,
                _ => value,
            });
        }
        best
    }

    fn free_bound(&self, bounds: &Bounds, covered: Option<&[bool]>) -> Rational {
        let mut total = self.constant;
        for (v, c) in self.effective.iter().enumerate() {
            if c.is_zero() || covered.is_some_and(|cov| cov[v]) {
                continue;
            }
            total += (*c * bounds.lower[v]).max(*c * bounds.upper[v]);
        }
        total
    }

    fn family_bound(&self, rows: &[LinearConstraint], family: &[usize], bounds: &Bounds) -> Option<Rational> {
        let mut covered = vec![false; self.effective.len()];
        let mut total = Rational::zero();
        for r in family {
            let row = &rows[*r];
            row.terms.iter().for_each(|(v, _)| covered[*v] = true);
            total += row_relaxation(row, &self.effective, bounds)?;
        }
        Some(total + self.free_bound(bounds, Some(&covered)))
    }
}

fn fold_for(model: &Model, z: usize, rows: &[usize]) -> Option<Fold> {
    if rows.is_empty() {
        return None;
    }
    let mut shadow = None;
    let mut lines = Vec::new();
    for r in rows {
        let row = &model.constraints()[*r];
        if row.terms.len() != 2 {
            return None;
        }
        let (zc, (x, xc)) = match (row.terms[0], row.terms[1]) {
            ((v, c), other) if v == z => (c, other),
            (other, (v, c)) if v == z => (c, other),
            _ => return None,
        };
        let lower_bounding = match row.relation {
            Relation::Le => zc < Rational::zero(),
            Relation::Ge => zc > Rational::zero(),
            Relation::Eq => false,
        };
        if !lower_bounding || *shadow.get_or_insert(x) != x {
            return None;
        }
        // z >= (rhs - xc·x) / zc
        lines.push((row.rhs / zc, -xc / zc));
    }
    let x = shadow?;
    let var = model.variable(x);
    if !var.kind.is_integral() || var.upper - var.lower != Rational::from_integer(1) {
        return None;
    }
    let floor = model.variable(z).lower;
    let h = |at: Rational| lines.iter().fold(floor, |acc, (b, m)| acc.max(*b + *m * at));
    Some(Fold { shadow: x, at_low: h(var.lower), at_high: h(var.upper) })
}

/// Exact optimum of max Σ e_v x_v subject to one row and the box, or `None`
/// when the row cannot be satisfied within the box.
fn row_relaxation(row: &LinearConstraint, effective: &[Rational], bounds: &Bounds) -> Option<Rational> {
    let zero = Rational::zero();
    let mut value = zero;
    let mut activity = zero;
    let mut start = Vec::with_capacity(row.terms.len());
    for (v, a) in &row.terms {
        let e = effective[*v];
        let x = if e > zero { bounds.upper[*v] } else { bounds.lower[*v] };
        value += e * x;
        activity += *a * x;
        start.push(x);
    }
    let too_high = matches!(row.relation, Relation::Le | Relation::Eq) && activity > row.rhs;
    let too_low = matches!(row.relation, Relation::Ge | Relation::Eq) && activity < row.rhs;
    if !too_high && !too_low {
        return Some(value);
    }
    // Each move shifts activity towards the row at a constant loss per unit.
    let mut moves: Vec<(Rational, Rational)> = Vec::new();
    for ((v, a), x) in row.terms.iter().zip(&start) {
        if a.is_zero() {
            continue;
        }
        let e = effective[*v];
        let (lo, hi) = (bounds.lower[*v], bounds.upper[*v]);
        let (capacity, loss) = if too_high {
            if *a > zero {
                (*a * (*x - lo), e / *a)
            } else {
                (-*a * (hi - *x), e / *a)
            }
        } else if *a > zero {
            (*a * (hi - *x), -e / *a)
        } else {
            (-*a * (*x - lo), -e / *a)
        };
        if capacity > zero {
            moves.push((loss, capacity));
        }
    }
    moves.sort_by_key(|p| p.0);
    let mut needed = if too_high { activity - row.rhs } else { row.rhs - activity };
    for (loss, capacity) in moves {
        let used = capacity.min(needed);
        value -= loss * used;
        needed -= used;
        if needed.is_zero() {
            return Some(value);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Metadata, ModelBuilder};
    use crate::rational::int;
    use num_traits::Signed;
    use proptest::prelude::*;

    fn three_var_model() -> Model {
        let mut b = ModelBuilder::new(vec![]);
        for (i, c) in [3, 2, -1].iter().enumerate() {
            let v = b.add_binary(format!("x{}", i + 1), true, vec![]);
            b.add_objective_term(v, int(*c));
        }
        b.build(Sense::Maximize, Metadata::default()).unwrap()
    }

    fn model_bounds(model: &Model) -> Bounds {
        let (l, u) = model.bounds();
        Bounds::new(l, u)
    }

    #[test]
    fn coefficient_sum_bound() {
        let m = three_var_model();
        let mut b = model_bounds(&m);
        assert_eq!(optimistic_bound(&m, &b), int(5));
        b.fix(0, int(0));
        assert_eq!(optimistic_bound(&m, &b), int(2));
    }

    #[test]
    fn fully_fixed_bound_equals_objective() {
        let m = three_var_model();
        let mut b = model_bounds(&m);
        for (i, x) in [1, 0, 1].iter().enumerate() {
            b.fix(i, int(*x));
        }
        let a = crate::model::Assignment::new(vec![int(1), int(0), int(1)]);
        assert_eq!(optimistic_bound(&m, &b), m.evaluate_objective(&a).unwrap());
        let rb = RowBounder::new(&m, &b);
        assert_eq!(rb.bound(&m, &b), Some(int(2)));
    }

    #[test]
    fn knapsack_row_gives_fractional_bound() {
        // max 4a + 3b + 2c subject to 5a + 5b + c <= 6.
        let mut builder = ModelBuilder::new(vec![]);
        let vars: Vec<_> = (0..3).map(|i| builder.add_binary(format!("x{i}"), true, vec![])).collect();
        for (v, c) in vars.iter().zip([4, 3, 2]) {
            builder.add_objective_term(*v, int(c));
        }
        builder.add_constraint(vec![(0, int(5)), (1, int(5)), (2, int(1))], Relation::Le, int(6));
        let m = builder.build(Sense::Maximize, Metadata::default()).unwrap();
        let b = model_bounds(&m);
        let rb = RowBounder::new(&m, &b);
        // Ratios: c 2/1, a 4/5, b 3/5 → c (1), a (5 units) fill 6 → 2 + 4 = 6.
        assert_eq!(rb.bound(&m, &b), Some(int(6)));
        assert_eq!(optimistic_bound(&m, &b), int(9));
    }

    #[test]
    fn change_variables_fold_into_their_shadow() {
        // max 2x - z, x - z <= 0, -x - z <= -1 (original value 1): z = |x - 1|.
        let mut builder = ModelBuilder::new(vec![]);
        let x = builder.add_binary("x", true, vec![]);
        let z = builder.add_var("z", VarKind::Continuous, int(0), int(1), false, vec![]);
        builder.add_objective_term(x, int(2));
        builder.add_objective_term(z, int(-1));
        builder.add_constraint(vec![(x, int(1)), (z, int(-1))], Relation::Le, int(1));
        builder.add_constraint(vec![(x, int(-1)), (z, int(-1))], Relation::Le, int(-1));
        let m = builder.build(Sense::Maximize, Metadata::default()).unwrap();
        let mut b = model_bounds(&m);
        let rb = RowBounder::new(&m, &b);
        assert!(rb.integral_objective());
        assert_eq!(rb.bound(&m, &b), Some(int(2)));
        b.fix(x, int(0));
        assert_eq!(rb.bound(&m, &b), Some(int(-1)));
    }

    /// Max-sense model over `n` binaries plus, when `shadow` is set, one
    /// continuous change variable per binary tied to `shadow[i]`.
    fn random_model(objective: &[i64], rows: &[(Vec<i64>, u8, i64)], shadow: Option<(&[bool], i64)>) -> Model {
        let n = objective.len();
        let mut builder = ModelBuilder::new(vec![]);
        let xs: Vec<_> = (0..n).map(|i| builder.add_binary(format!("x{i}"), true, vec![])).collect();
        for (x, c) in xs.iter().zip(objective) {
            builder.add_objective_term(*x, int(*c));
        }
        for (coefs, rel, rhs) in rows {
            let rel = [Relation::Le, Relation::Eq, Relation::Ge][*rel as usize % 3];
            builder.add_constraint(xs.iter().zip(coefs).map(|(x, c)| (*x, int(*c))).collect(), rel, int(*rhs));
        }
        if let Some((s, beta)) = shadow {
            for (i, x) in xs.iter().enumerate() {
                let z = builder.add_var(format!("z{i}"), VarKind::Continuous, int(0), int(1), false, vec![]);
                builder.add_objective_term(z, int(-beta));
                let si = int(s[i] as i64);
                builder.add_constraint(vec![(*x, int(1)), (z, int(-1))], Relation::Le, si);
                builder.add_constraint(vec![(*x, int(-1)), (z, int(-1))], Relation::Le, -si);
            }
        }
        builder.build(Sense::Maximize, Metadata::default()).unwrap()
    }

    /// Best objective over feasible completions; z takes its smallest
    /// feasible value, which is optimal since its coefficient is negative.
    fn best_completion(m: &Model, n: usize, bounds: &Bounds) -> Option<Rational> {
        let mut best = None;
        for mask in 0u32..(1 << n) {
            let mut values: Vec<Rational> = (0..n).map(|i| int(((mask >> i) & 1) as i64)).collect();
            if (0..n).any(|i| values[i] < bounds.lower[i] || values[i] > bounds.upper[i]) {
                continue;
            }
            for i in n..m.num_vars() {
                // Rows come in pairs per z: x - z <= s, -x - z <= -s.
                let s = m.constraints()[m.constraints().len() - 2 * (m.num_vars() - n) + 2 * (i - n)].rhs;
                values.push((values[i - n] - s).abs());
            }
            let a = crate::model::Assignment::new(values);
            if m.check_feasibility(&a).unwrap().is_feasible() {
                let q = m.evaluate_objective(&a).unwrap();
                if best.is_none_or(|b| q > b) {
                    best = Some(q);
                }
            }
        }
        best
    }

    fn rows_strategy(n: usize) -> impl Strategy<Value = Vec<(Vec<i64>, u8, i64)>> {
        prop::collection::vec((prop::collection::vec(-3i64..=5, n), 0u8..3, -2i64..=7), 0..4)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn bounds_are_admissible(
            (objective, rows, fixes, shadow) in (2usize..=7).prop_flat_map(|n| (
                prop::collection::vec(-5i64..=6, n),
                rows_strategy(n),
                prop::collection::vec(0u8..3, n),
                prop::option::of((prop::collection::vec(any::<bool>(), n), 1i64..=3)),
            ))
        ) {
            let n = objective.len();
            let m = random_model(&objective, &rows, shadow.as_ref().map(|(s, b)| (s.as_slice(), *b)));
            let root = model_bounds(&m);
            let rb = RowBounder::new(&m, &root);
            let mut node = root.clone();
            for (i, f) in fixes.iter().enumerate() {
                if *f < 2 {
                    node.fix(i, int(*f as i64));
                }
            }
            let Some(best) = best_completion(&m, n, &node) else { return Ok(()) };
            prop_assert!(optimistic_bound(&m, &node) >= best);
            let bound = rb.bound(&m, &node);
            prop_assert!(bound.is_some_and(|b| b >= best), "bound {:?} below completion {}", bound, best);
        }
    }
}
