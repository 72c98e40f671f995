//! Dense two-phase simplex for the small exact-predicate LPs.
//!
//! Geometry form: maximize `c . x` subject to `a_i . x <= b_i` with `x`
//! free, dimension <= 5 or so, a few hundred constraints at most. Free
//! variables are split as `x = u - w`; Bland's rule keeps pivoting
//! deterministic and cycle-free, which the reproducibility contract of the
//! covering pipeline relies on.

use nalgebra::DVector;

/// Feasibility/optimality tolerance on reduced costs and constraint slacks.
pub const LP_TOL: f64 = 1e-9;
/// Minimum magnitude accepted for a pivot element.
const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// A linear constraint `a . x <= b`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub a: DVector<f64>,
    pub b: f64,
}

impl Constraint {
    pub fn new(a: DVector<f64>, b: f64) -> Self {
        Constraint { a, b }
    }

    pub fn satisfied(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.a.dot(x) <= self.b + tol
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
    art_start: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col];
        let inv = 1.0 / piv;
        for v in self.rows[row].iter_mut() {
            *v *= inv;
        }
        self.rhs[row] *= inv;
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let factor = self.rows[r][col];
            if factor == 0.0 {
                continue;
            }
            for c in 0..self.ncols {
                let delta = factor * self.rows[row][c];
                self.rows[r][c] -= delta;
            }
            self.rhs[r] -= factor * self.rhs[row];
            self.rows[r][col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Bland's rule: entering = lowest-index column with reduced cost below
    /// -LP_TOL, leaving = min-ratio row with lowest basis index on ties.
    /// Returns false on unbounded.
    fn solve_min(&mut self, cost: &[f64], allow_artificial: bool) -> bool {
        loop {
            let mut entering = None;
            for j in 0..self.ncols {
                if !allow_artificial && j >= self.art_start {
                    continue;
                }
                if self.basis.contains(&j) {
                    continue;
                }
                let mut red = cost[j];
                for (i, &bi) in self.basis.iter().enumerate() {
                    let cb = cost[bi];
                    if cb != 0.0 {
                        red -= cb * self.rows[i][j];
                    }
                }
                if red < -LP_TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return true;
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let t = self.rows[i][col];
                if t > PIVOT_TOL {
                    let ratio = self.rhs[i] / t;
                    match leaving {
                        None => leaving = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - PIVOT_TOL
                                || (ratio < lr + PIVOT_TOL && self.basis[i] < self.basis[li])
                            {
                                leaving = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((row, _)) = leaving else {
                return false;
            };
            self.pivot(row, col);
        }
    }

    fn var_value(&self, col: usize) -> f64 {
        for (i, &b) in self.basis.iter().enumerate() {
            if b == col {
                return self.rhs[i];
            }
        }
        0.0
    }
}

fn build(constraints: &[Constraint]) -> (Tableau, usize) {
    let m = constraints.len();
    let n = constraints[0].a.len();
    // columns: u(n), w(n), slacks(m), artificials appended per negative row
    let base_cols = 2 * n + m;
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art_rows = Vec::new();
    for (i, con) in constraints.iter().enumerate() {
        let mut row = vec![0.0; base_cols];
        let flip = if con.b < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            row[j] = flip * con.a[j];
            row[n + j] = -flip * con.a[j];
        }
        row[2 * n + i] = flip;
        rows.push(row);
        rhs.push(flip * con.b);
        if flip < 0.0 {
            art_rows.push(i);
            basis.push(usize::MAX); // patched below
        } else {
            basis.push(2 * n + i);
        }
    }
    let ncols = base_cols + art_rows.len();
    for row in rows.iter_mut() {
        row.resize(ncols, 0.0);
    }
    for (k, &i) in art_rows.iter().enumerate() {
        rows[i][base_cols + k] = 1.0;
        basis[i] = base_cols + k;
    }
    (
        Tableau {
            rows,
            rhs,
            basis,
            ncols,
            art_start: base_cols,
        },
        n,
    )
}

/// Runs phase 1; returns the tableau with a feasible basis, or None.
fn phase1(constraints: &[Constraint]) -> Option<(Tableau, usize)> {
    let (mut t, n) = build(constraints);
    if t.ncols > t.art_start {
        let mut cost = vec![0.0; t.ncols];
        for c in cost.iter_mut().skip(t.art_start) {
            *c = 1.0;
        }
        t.solve_min(&cost, true);
        let infeas: f64 = t
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= t.art_start)
            .map(|(i, _)| t.rhs[i])
            .sum();
        if infeas > 1e-7 {
            return None;
        }
        // Drive lingering zero-level artificials out when a real pivot exists.
        for i in 0..t.rows.len() {
            if t.basis[i] >= t.art_start {
                if let Some(col) = (0..t.art_start).find(|&j| t.rows[i][j].abs() > 1e-8) {
                    t.pivot(i, col);
                }
            }
        }
    }
    Some((t, n))
}

fn extract(t: &Tableau, n: usize) -> Vec<f64> {
    (0..n).map(|j| t.var_value(j) - t.var_value(n + j)).collect()
}

/// Maximize `objective . x` over `{x : a_i . x <= b_i}`.
pub fn maximize(objective: &DVector<f64>, constraints: &[Constraint]) -> LpOutcome {
    assert!(!constraints.is_empty(), "lp needs at least one constraint");
    let n = objective.len();
    debug_assert!(constraints.iter().all(|c| c.a.len() == n));
    let Some((mut t, _)) = phase1(constraints) else {
        return LpOutcome::Infeasible;
    };
    let mut cost = vec![0.0; t.ncols];
    for j in 0..n {
        cost[j] = -objective[j];
        cost[n + j] = objective[j];
    }
    if !t.solve_min(&cost, false) {
        return LpOutcome::Unbounded;
    }
    let x = extract(&t, n);
    let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpOutcome::Optimal { x, value }
}

/// Minimize `objective . x`; same contract as [`maximize`].
pub fn minimize(objective: &DVector<f64>, constraints: &[Constraint]) -> LpOutcome {
    match maximize(&(-objective), constraints) {
        LpOutcome::Optimal { x, value } => LpOutcome::Optimal { x, value: -value },
        other => other,
    }
}

/// A point satisfying all constraints, if one exists.
pub fn feasible_point(constraints: &[Constraint]) -> Option<Vec<f64>> {
    let (t, n) = phase1(constraints)?;
    Some(extract(&t, n))
}
