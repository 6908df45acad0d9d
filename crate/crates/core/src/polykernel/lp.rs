//! Exact two-phase simplex over the rationals with Bland's rule.
//!
//! Problems are in equality standard form: minimize `c·x` subject to
//! `A x = b`, `x ≥ 0`. Bland's rule rules out cycling, so every call
//! terminates.

use num_traits::{One, Signed, Zero};

use super::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

#[derive(Clone, Debug, Default)]
pub struct StandardLp {
    pub objective: Vec<Rational>,
    pub rows: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
}

impl StandardLp {
    pub fn new(num_vars: usize) -> Self {
        StandardLp { objective: vec![Rational::zero(); num_vars], rows: Vec::new(), rhs: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        debug_assert_eq!(coeffs.len(), self.num_vars());
        self.rows.push(coeffs);
        self.rhs.push(rhs);
    }

    pub fn solve(&self) -> LpOutcome {
        solve(&self.objective, &self.rows, &self.rhs)
    }
}

struct Tableau {
    // m rows of width ncols + 1; last entry is the right-hand side.
    t: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col].clone();
        if !p.is_one() {
            for v in self.t[row].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let f = r[col].clone();
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    fn reduced_cost(&self, cost: &[Rational], j: usize) -> Rational {
        let mut z = cost[j].clone();
        for (i, r) in self.t.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if !cb.is_zero() && !r[j].is_zero() {
                z -= cb * &r[j];
            }
        }
        z
    }

    /// Runs simplex iterations over the allowed columns. Returns false if unbounded.
    fn optimize(&mut self, cost: &[Rational], allowed: &dyn Fn(usize) -> bool) -> bool {
        loop {
            let entering = (0..self.ncols)
                .filter(|&j| allowed(j) && !self.basis.contains(&j))
                .find(|&j| self.reduced_cost(cost, j).is_negative());
            let Some(col) = entering else { return true };
            let mut best: Option<(usize, Rational)> = None;
            for (i, r) in self.t.iter().enumerate() {
                if r[col].is_positive() {
                    let ratio = &r[self.ncols] / &r[col];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                None => return false,
                Some((row, _)) => self.pivot(row, col),
            }
        }
    }
}

pub fn solve(objective: &[Rational], rows: &[Vec<Rational>], rhs: &[Rational]) -> LpOutcome {
    let n = objective.len();
    let m = rows.len();
    if m == 0 {
        return if objective.iter().any(|c| c.is_negative()) {
            LpOutcome::Unbounded
        } else {
            LpOutcome::Optimal { x: vec![Rational::zero(); n], value: Rational::zero() }
        };
    }
    let ncols = n + m;
    let mut t = Vec::with_capacity(m);
    for (i, (row, b)) in rows.iter().zip(rhs).enumerate() {
        let flip = b.is_negative();
        let mut r: Vec<Rational> = Vec::with_capacity(ncols + 1);
        r.extend(row.iter().map(|v| if flip { -v } else { v.clone() }));
        r.extend((0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
        r.push(if flip { -b } else { b.clone() });
        t.push(r);
    }
    let mut tab = Tableau { t, basis: (n..n + m).collect(), ncols };

    let phase1: Vec<Rational> =
        (0..ncols).map(|j| if j >= n { Rational::one() } else { Rational::zero() }).collect();
    tab.optimize(&phase1, &|_| true);
    let infeas: Rational = tab
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= n)
        .map(|(i, _)| tab.t[i][ncols].clone())
        .sum();
    if infeas.is_positive() {
        return LpOutcome::Infeasible;
    }

    // Drive zero-level artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < tab.t.len() {
        if tab.basis[i] >= n {
            if let Some(col) = (0..n).find(|&j| !tab.t[i][j].is_zero()) {
                tab.pivot(i, col);
                i += 1;
            } else {
                tab.t.remove(i);
                tab.basis.remove(i);
            }
        } else {
            i += 1;
        }
    }

    let mut cost = objective.to_vec();
    cost.extend((0..m).map(|_| Rational::zero()));
    if !tab.optimize(&cost, &|j| j < n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.t[i][ncols].clone();
        }
    }
    let value = x.iter().zip(objective).fold(Rational::zero(), |acc, (a, c)| acc + a * c);
    LpOutcome::Optimal { x, value }
}
