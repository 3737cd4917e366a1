//! Dense two-phase simplex over polytopes `{u : A u <= b}` with free variables.
//!
//! Pivoting follows Bland's rule (lowest-index entering column, lowest-index
//! basic variable among ratio ties), so outcomes are deterministic and the
//! method cannot cycle. Problems here have a handful of columns and tens of
//! rows; no factorization tricks are used.

use crate::error::{Error, Result};

/// Phase-I objective above which a polytope is declared empty.
pub const INFEASIBILITY_TOLERANCE: f64 = 1e-7;

/// Slack allowed when checking `A u <= b` for a returned point.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-8;

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

/// Linear-inequality set `{u : A u <= b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    dim: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl Polytope {
    /// All of `R^dim`.
    pub fn unconstrained(dim: usize) -> Self {
        Self {
            dim,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn from_rows(dim: usize, rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        if rows.len() != rhs.len() {
            return Err(Error::DimensionMismatch {
                context: "polytope right-hand side",
                expected: rows.len(),
                actual: rhs.len(),
            });
        }
        let mut p = Self::unconstrained(dim);
        for (row, b) in rows.into_iter().zip(rhs) {
            p.push(row, b)?;
        }
        Ok(p)
    }

    /// Box `lower <= u <= upper`, emitted as `u_i <= upper_i` then `-u_i <= -lower_i` per axis.
    pub fn from_box(lower: &[f64], upper: &[f64]) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                context: "box bounds",
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        let dim = lower.len();
        let mut p = Self::unconstrained(dim);
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            p.push(e.clone(), upper[i])?;
            e[i] = -1.0;
            p.push(e, -lower[i])?;
        }
        Ok(p)
    }

    pub fn push(&mut self, row: Vec<f64>, rhs: f64) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "polytope row",
                expected: self.dim,
                actual: row.len(),
            });
        }
        self.rows.push(row);
        self.rhs.push(rhs);
        Ok(())
    }

    /// Rows of `self` followed by the rows of `other`.
    pub fn stacked(&self, other: &Polytope) -> Result<Polytope> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                context: "stacked polytope",
                expected: self.dim,
                actual: other.dim,
            });
        }
        let mut p = self.clone();
        p.rows.extend(other.rows.iter().cloned());
        p.rhs.extend_from_slice(&other.rhs);
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Largest violation `max_i (A_i u - b_i)`, or `-inf` without rows.
    pub fn max_violation(&self, u: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| dot(row, u) - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.dim && self.max_violation(u) <= CONSTRAINT_TOLERANCE
    }

    fn check_finite(&self) -> Result<()> {
        if self.rows.iter().flatten().chain(&self.rhs).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("polytope coefficients"));
        }
        Ok(())
    }
}

/// Maximize `objective . u` over `constraints`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    constraints: Polytope,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, constraints: Polytope) -> Result<Self> {
        if objective.len() != constraints.dim() {
            return Err(Error::DimensionMismatch {
                context: "LP objective",
                expected: constraints.dim(),
                actual: objective.len(),
            });
        }
        Ok(Self {
            objective,
            constraints,
        })
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &Polytope {
        &self.constraints
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, point: Vec<f64> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

/// Solves `max c^T u s.t. A u <= b` and returns a vertex when one is optimal.
pub fn solve_lp(problem: &LpProblem) -> Result<LpOutcome> {
    if problem.objective.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("LP objective"));
    }
    problem.constraints.check_finite()?;

    let mut tab = Tableau::new(&problem.constraints);
    if !tab.phase_one()? {
        return Ok(LpOutcome::Infeasible);
    }
    let dim = problem.constraints.dim;
    let mut cost = vec![0.0; tab.width()];
    for (j, c) in problem.objective.iter().enumerate() {
        cost[j] = *c;
        cost[dim + j] = -*c;
    }
    if !tab.optimize(&cost, tab.n_structural())? {
        return Ok(LpOutcome::Unbounded);
    }
    let point = tab.point(dim);
    let value = dot(&problem.objective, &point);
    Ok(LpOutcome::Optimal { value, point })
}

/// Phase-I emptiness test: true iff total constraint violation can be driven
/// to at most [`INFEASIBILITY_TOLERANCE`].
pub fn phase_one_feasible(poly: &Polytope) -> Result<bool> {
    poly.check_finite()?;
    Tableau::new(poly).phase_one()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Standard-form tableau. Columns are `u+ (dim) | u- (dim) | slack (rows) |
/// artificial (one per row with negative rhs)`; the last entry of each row is
/// the right-hand side.
struct Tableau {
    dim: usize,
    n_rows: usize,
    n_artificial: usize,
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
}

impl Tableau {
    fn new(poly: &Polytope) -> Self {
        let dim = poly.dim;
        let n_rows = poly.n_rows();
        let n_artificial = poly.rhs.iter().filter(|b| **b < 0.0).count();
        let width = 2 * dim + n_rows + n_artificial;
        let mut rows = Vec::with_capacity(n_rows);
        let mut basis = Vec::with_capacity(n_rows);
        let mut next_art = 2 * dim + n_rows;
        for (i, (a, b)) in poly.rows.iter().zip(&poly.rhs).enumerate() {
            let sign = if *b < 0.0 { -1.0 } else { 1.0 };
            let mut row = vec![0.0; width + 1];
            for j in 0..dim {
                row[j] = sign * a[j];
                row[dim + j] = -sign * a[j];
            }
            row[2 * dim + i] = sign;
            row[width] = sign * b;
            if *b < 0.0 {
                row[next_art] = 1.0;
                basis.push(next_art);
                next_art += 1;
            } else {
                basis.push(2 * dim + i);
            }
            rows.push(row);
        }
        Self {
            dim,
            n_rows,
            n_artificial,
            rows,
            basis,
        }
    }

    fn width(&self) -> usize {
        2 * self.dim + self.n_rows + self.n_artificial
    }

    fn n_structural(&self) -> usize {
        2 * self.dim + self.n_rows
    }

    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width()]
    }

    /// Returns true when feasible; afterwards no artificial column is basic
    /// unless its row is redundant.
    fn phase_one(&mut self) -> Result<bool> {
        if self.n_artificial == 0 {
            return Ok(true);
        }
        let first_art = self.n_structural();
        let mut cost = vec![0.0; self.width()];
        for c in cost.iter_mut().skip(first_art) {
            *c = -1.0;
        }
        // Maximizing minus the artificial sum is bounded above by zero.
        self.optimize(&cost, self.width())?;
        let violation: f64 = (0..self.n_rows)
            .filter(|&i| self.basis[i] >= first_art)
            .map(|i| self.rhs(i))
            .sum();
        if violation > INFEASIBILITY_TOLERANCE {
            return Ok(false);
        }
        for i in 0..self.n_rows {
            if self.basis[i] >= first_art {
                if let Some(j) = (0..first_art).find(|&j| self.rows[i][j].abs() > 1e-9) {
                    self.pivot(i, j);
                }
            }
        }
        Ok(true)
    }

    /// Maximizes `cost . z` using columns `< allowed` as entering candidates.
    /// Returns false when unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<bool> {
        let width = self.width();
        for _ in 0..MAX_PIVOTS {
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced = cost[j]
                    - (0..self.n_rows)
                        .map(|i| cost[self.basis[i]] * self.rows[i][j])
                        .sum::<f64>();
                reduced > COST_EPS
            });
            let Some(col) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.n_rows {
                let a = self.rows[i][col];
                if a <= PIVOT_EPS {
                    continue;
                }
                let ratio = self.rows[i][width].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((best, r)) => {
                        let tie = (ratio - r).abs() <= 1e-12 * (1.0 + r.abs());
                        if ratio < r && !tie || tie && self.basis[i] < self.basis[best] {
                            Some((i, ratio))
                        } else {
                            Some((best, r))
                        }
                    }
                };
            }
            let Some((row, _)) = leave else {
                return Ok(false);
            };
            self.pivot(row, col);
        }
        Err(Error::PivotLimit(MAX_PIVOTS))
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col];
            if factor != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
                r[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    fn point(&self, dim: usize) -> Vec<f64> {
        let mut z = vec![0.0; 2 * dim];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < 2 * dim {
                z[b] = self.rhs(i);
            }
        }
        (0..dim).map(|j| z[j] - z[dim + j]).collect()
    }
}
