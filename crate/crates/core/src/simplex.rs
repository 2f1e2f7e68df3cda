//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Sized for the small LPs built by the bound routines (a few hundred rows). Every
//! returned optimum is re-checked against the original constraints.

use crate::error::{Error, Result};

pub const DEFAULT_PIVOT_CAP: usize = 1_000_000;

const PIVOT_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarBound {
    NonNegative,
    Free,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

/// `minimize c·x` subject to linear rows and per-variable sign bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLp {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VarBound>,
}

impl DenseLp {
    /// New LP with all variables non-negative and no rows.
    pub fn minimize(objective: Vec<f64>) -> Self {
        let bounds = vec![VarBound::NonNegative; objective.len()];
        DenseLp {
            objective,
            constraints: Vec::new(),
            bounds,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_free(&mut self, j: usize) {
        self.bounds[j] = VarBound::Free;
    }

    pub fn add(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if n == 0 {
            return Err(Error::Input("LP has no variables".into()));
        }
        if self.bounds.len() != n {
            return Err(Error::Input("bounds length differs from objective".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::Input("non-finite objective coefficient".into()));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::Input(format!(
                    "row {i} has {} coefficients, expected {n}",
                    row.coeffs.len()
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(Error::Input(format!("row {i} has a non-finite entry")));
            }
        }
        Ok(())
    }

    /// Largest violation of rows and sign bounds at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (xj, b) in x.iter().zip(&self.bounds) {
            if *b == VarBound::NonNegative {
                worst = worst.max(-xj);
            }
        }
        for row in &self.constraints {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match row.rel {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    pub fn rhs_norm(&self) -> f64 {
        self.constraints
            .iter()
            .map(|r| r.rhs.abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point; empty unless optimal.
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Reduced-cost row, `rhs` slot holds `−z`.
    cost: Vec<f64>,
    width: usize,
    pivots: usize,
    cap: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width]
    }

    fn set_costs(&mut self, c: &[f64]) {
        let mut cost = c.to_vec();
        cost.push(0.0);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (cj, a) in cost.iter_mut().zip(&self.rows[i]) {
                    *cj -= cb * a;
                }
            }
        }
        self.cost = cost;
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let p = self.rows[r][e];
        for a in self.rows[r].iter_mut() {
            *a /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[e];
            if factor != 0.0 {
                for (a, pr) in row.iter_mut().zip(&pivot_row) {
                    *a -= factor * pr;
                }
                row[e] = 0.0;
            }
        }
        let factor = self.cost[e];
        if factor != 0.0 {
            for (a, pr) in self.cost.iter_mut().zip(&pivot_row) {
                *a -= factor * pr;
            }
            self.cost[e] = 0.0;
        }
        self.basis[r] = e;
        self.pivots += 1;
    }

    /// Bland's rule: lowest-index improving column, lowest-index basic variable on ties.
    fn run(&mut self, allowed: &[bool]) -> Result<Outcome> {
        loop {
            let entering = (0..self.width).find(|&j| allowed[j] && self.cost[j] < -COST_EPS);
            let Some(e) = entering else {
                return Ok(Outcome::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][e];
                if a <= PIVOT_EPS {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        if ratio < best && !tie || tie && self.basis[i] < self.basis[r] {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                return Ok(Outcome::Unbounded);
            };
            if self.pivots >= self.cap {
                return Err(Error::Resource(format!(
                    "simplex exceeded {} pivots",
                    self.cap
                )));
            }
            self.pivot(r, e);
        }
    }
}

pub fn solve_lp(lp: &DenseLp) -> Result<LpSolution> {
    solve_lp_with_cap(lp, DEFAULT_PIVOT_CAP)
}

pub fn solve_lp_with_cap(lp: &DenseLp, cap: usize) -> Result<LpSolution> {
    lp.validate()?;

    // Column layout: structural (free variables split in two), slacks, artificials.
    let mut col_of = Vec::with_capacity(lp.n_vars());
    let mut n_struct = 0;
    for b in &lp.bounds {
        col_of.push(n_struct);
        n_struct += if *b == VarBound::Free { 2 } else { 1 };
    }

    struct Row {
        coeffs: Vec<f64>,
        rel: Relation,
        rhs: f64,
    }
    let rows: Vec<Row> = lp
        .constraints
        .iter()
        .map(|c| {
            let mut coeffs = vec![0.0; n_struct];
            for (j, a) in c.coeffs.iter().enumerate() {
                coeffs[col_of[j]] = *a;
                if lp.bounds[j] == VarBound::Free {
                    coeffs[col_of[j] + 1] = -a;
                }
            }
            let (mut rel, mut rhs) = (c.rel, c.rhs);
            if rhs < 0.0 || rhs == 0.0 && rel == Relation::Ge {
                for a in &mut coeffs {
                    *a = -*a;
                }
                rhs = -rhs;
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            Row { coeffs, rel, rhs }
        })
        .collect();

    let n_slack = rows.iter().filter(|r| r.rel != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.rel != Relation::Le).count();
    let width = n_struct + n_slack + n_art;
    let art_start = n_struct + n_slack;

    let mut table = Vec::with_capacity(rows.len());
    let mut basis = Vec::with_capacity(rows.len());
    let (mut slack, mut art) = (n_struct, art_start);
    for r in &rows {
        let mut line = r.coeffs.clone();
        line.resize(width + 1, 0.0);
        line[width] = r.rhs;
        match r.rel {
            Relation::Le => {
                line[slack] = 1.0;
                basis.push(slack);
                slack += 1;
            }
            Relation::Ge => {
                line[slack] = -1.0;
                line[art] = 1.0;
                basis.push(art);
                slack += 1;
                art += 1;
            }
            Relation::Eq => {
                line[art] = 1.0;
                basis.push(art);
                art += 1;
            }
        }
        table.push(line);
    }

    let mut t = Tableau {
        rows: table,
        basis,
        cost: Vec::new(),
        width,
        pivots: 0,
        cap,
    };
    let all = vec![true; width];
    let feas_tol = 1e-9 * (1.0 + lp.rhs_norm());

    if n_art > 0 {
        let mut c1 = vec![0.0; width];
        for c in &mut c1[art_start..] {
            *c = 1.0;
        }
        t.set_costs(&c1);
        t.run(&all)?;
        if -t.cost[width] > feas_tol {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                objective: f64::NAN,
                pivots: t.pivots,
            });
        }
        // Drive zero-level artificials out of the basis, dropping redundant rows.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art_start {
                let col = (0..art_start).find(|&j| t.rows[i][j].abs() > PIVOT_EPS);
                match col {
                    Some(j) => {
                        t.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    let mut c2 = vec![0.0; width];
    for (j, c) in lp.objective.iter().enumerate() {
        c2[col_of[j]] = *c;
        if lp.bounds[j] == VarBound::Free {
            c2[col_of[j] + 1] = -c;
        }
    }
    t.set_costs(&c2);
    let mut allowed = all;
    for a in &mut allowed[art_start..] {
        *a = false;
    }
    if let Outcome::Unbounded = t.run(&allowed)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            objective: f64::NEG_INFINITY,
            pivots: t.pivots,
        });
    }

    let mut cols = vec![0.0; width];
    for (i, &b) in t.basis.iter().enumerate() {
        cols[b] = t.rhs(i);
    }
    let x: Vec<f64> = (0..lp.n_vars())
        .map(|j| match lp.bounds[j] {
            VarBound::NonNegative => cols[col_of[j]].max(0.0),
            VarBound::Free => cols[col_of[j]] - cols[col_of[j] + 1],
        })
        .collect();
    let violation = lp.max_violation(&x);
    if violation > feas_tol {
        return Err(Error::Internal(format!(
            "simplex optimum violates constraints by {violation:e}"
        )));
    }
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
        pivots: t.pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_optimum() {
        // min −x − y  s.t.  x + 2y ≤ 4,  3x + y ≤ 6
        let mut lp = DenseLp::minimize(vec![-1.0, -1.0]);
        lp.add(vec![1.0, 2.0], Relation::Le, 4.0);
        lp.add(vec![3.0, 1.0], Relation::Le, 6.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 2.8).abs() < 1e-12);
        assert!((s.x[0] - 1.6).abs() < 1e-12 && (s.x[1] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn equality_and_free_variable() {
        // min a  s.t.  a ≥ 2 − t,  a ≥ t − 1,  t = 0.5, a free
        let mut lp = DenseLp::minimize(vec![1.0, 0.0]);
        lp.set_free(0);
        lp.add(vec![1.0, 1.0], Relation::Ge, 2.0);
        lp.add(vec![1.0, -1.0], Relation::Ge, -1.0);
        lp.add(vec![0.0, 1.0], Relation::Eq, 0.5);
        let s = solve_lp(&lp).unwrap();
        assert!((s.objective - 1.5).abs() < 1e-12);
    }

    #[test]
    fn negative_free_optimum() {
        let mut lp = DenseLp::minimize(vec![1.0]);
        lp.set_free(0);
        lp.add(vec![1.0], Relation::Ge, -3.0);
        let s = solve_lp(&lp).unwrap();
        assert!((s.x[0] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = DenseLp::minimize(vec![1.0]);
        lp.add(vec![1.0], Relation::Le, 1.0);
        lp.add(vec![1.0], Relation::Ge, 2.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = DenseLp::minimize(vec![-1.0, 0.0]);
        lp.add(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = DenseLp::minimize(vec![1.0, 2.0]);
        lp.add(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.add(vec![2.0, 2.0], Relation::Eq, 2.0);
        let s = solve_lp(&lp).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pivot_cap_is_enforced() {
        let mut lp = DenseLp::minimize(vec![-1.0, -1.0]);
        lp.add(vec![1.0, 2.0], Relation::Le, 4.0);
        lp.add(vec![3.0, 1.0], Relation::Le, 6.0);
        assert!(matches!(solve_lp_with_cap(&lp, 1), Err(Error::Resource(_))));
    }

    #[test]
    fn mismatched_row_is_rejected() {
        let mut lp = DenseLp::minimize(vec![1.0, 1.0]);
        lp.add(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(solve_lp(&lp), Err(Error::Input(_))));
    }
}
