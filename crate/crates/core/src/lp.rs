//! Exact rational linear programming via two-phase primal simplex with
//! Bland's rule. Sized for the tiny programs the Pareto test produces.

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal(Rational),
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// m rows of n variable columns plus a trailing right-hand side.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..self.rows.len() {
            if i != r && !self.rows[i][c].is_zero() {
                let factor = self.rows[i][c].clone();
                for j in 0..=self.ncols {
                    let v = &self.rows[i][j] - &(&factor * &self.rows[r][j]);
                    self.rows[i][j] = v;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost . x` from the current basic feasible point.
    /// Returns the optimal objective, or `None` when unbounded.
    fn optimize(&mut self, cost: &[Rational]) -> Option<Rational> {
        loop {
            // Reduced costs are recomputed from scratch; the tableaus here
            // are a handful of rows so this costs nothing measurable.
            let mut entering = None;
            for j in 0..self.ncols {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut zj = Rational::zero();
                for (i, &b) in self.basis.iter().enumerate() {
                    zj += &cost[b] * &self.rows[i][j];
                }
                if &zj - &cost[j] < Rational::zero() {
                    entering = Some(j);
                    break; // Bland: smallest index
                }
            }
            let Some(c) = entering else {
                let mut obj = Rational::zero();
                for (i, &b) in self.basis.iter().enumerate() {
                    obj += &cost[b] * self.rhs(i);
                }
                return Some(obj);
            };

            let mut leaving: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][c].is_positive() {
                    let ratio = self.rhs(i) / &self.rows[i][c];
                    let better = match &leaving {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            let (r, _) = leaving?;
            self.pivot(r, c);
        }
    }
}

/// Maximizes `cost . x` subject to `a x = b`, `x >= 0`.
pub fn maximize(a: &[Vec<Rational>], b: &[Rational], cost: &[Rational]) -> LpResult {
    let m = a.len();
    let n = cost.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    debug_assert_eq!(b.len(), m);

    // Phase 1: artificial variable per row, minimize their sum.
    let ncols = n + m;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for i in 0..m {
        let negate = b[i].is_negative();
        let mut row: Vec<Rational> = a[i]
            .iter()
            .map(|v| if negate { -v } else { v.clone() })
            .collect();
        row.extend((0..m).map(|j| {
            if j == i {
                Rational::one()
            } else {
                Rational::zero()
            }
        }));
        row.push(if negate { -&b[i] } else { b[i].clone() });
        rows.push(row);
        basis.push(n + i);
    }
    let mut tab = Tableau { rows, basis, ncols };

    let mut phase1_cost = vec![Rational::zero(); ncols];
    for j in n..ncols {
        phase1_cost[j] = Rational::from_int(-1);
    }
    let phase1_opt = tab
        .optimize(&phase1_cost)
        .expect("phase-1 objective is bounded");
    if phase1_opt != Rational::zero() {
        return LpResult::Infeasible;
    }

    // Drive any artificial still in the basis out (its value is zero).
    for i in 0..m {
        if tab.basis[i] >= n {
            if let Some(c) = (0..n).find(|&c| !tab.rows[i][c].is_zero()) {
                tab.pivot(i, c);
            }
        }
    }
    // Rows still basic in an artificial are all-zero structural rows
    // (redundant constraints); drop them, then strip the artificial
    // columns so they cannot re-enter in phase 2.
    let keep: Vec<usize> = (0..tab.rows.len()).filter(|&i| tab.basis[i] < n).collect();
    let rows: Vec<Vec<Rational>> = keep
        .iter()
        .map(|&i| {
            let mut row: Vec<Rational> = tab.rows[i][..n].to_vec();
            row.push(tab.rows[i][ncols].clone());
            row
        })
        .collect();
    tab.rows = rows;
    tab.basis = keep.iter().map(|&i| tab.basis[i]).collect();
    tab.ncols = n;

    let phase2_cost = cost.to_vec();
    match tab.optimize(&phase2_cost) {
        Some(obj) => LpResult::Optimal(obj),
        None => LpResult::Unbounded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn simple_distribution_lp() {
        // max 2p0 + p1 s.t. p0 + p1 = 1, p >= 0 -> 2 at p0 = 1
        let a = vec![vec![r(1), r(1)]];
        let b = vec![r(1)];
        let c = vec![r(2), r(1)];
        assert_eq!(maximize(&a, &b, &c), LpResult::Optimal(r(2)));
    }

    #[test]
    fn floors_bind() {
        // max p0 + 2p1 s.t. p0 + p1 = 1, p0 - s = 1/2 (p0 >= 1/2)
        let a = vec![vec![r(1), r(1), r(0)], vec![r(1), r(0), r(-1)]];
        let b = vec![r(1), Rational::new(1, 2)];
        let c = vec![r(1), r(2), r(0)];
        assert_eq!(maximize(&a, &b, &c), LpResult::Optimal(Rational::new(3, 2)));
    }

    #[test]
    fn infeasible() {
        // p0 + p1 = 1 and p0 + p1 = 2
        let a = vec![vec![r(1), r(1)], vec![r(1), r(1)]];
        let b = vec![r(1), r(2)];
        let c = vec![r(0), r(0)];
        assert_eq!(maximize(&a, &b, &c), LpResult::Infeasible);
    }

    #[test]
    fn unbounded() {
        // max x s.t. x - y = 0
        let a = vec![vec![r(1), r(-1)]];
        let b = vec![r(0)];
        let c = vec![r(1), r(0)];
        assert_eq!(maximize(&a, &b, &c), LpResult::Unbounded);
    }

    #[test]
    fn redundant_row() {
        let a = vec![vec![r(1), r(1)], vec![r(2), r(2)]];
        let b = vec![r(1), r(2)];
        let c = vec![r(3), r(1)];
        assert_eq!(maximize(&a, &b, &c), LpResult::Optimal(r(3)));
    }
}
