//! A dense two-phase simplex solver with Bland's anti-cycling rule.
//!
//! Small and deterministic: it backs the scheduling cross-checks, the
//! knapsack relaxation and the l1-ball suprema in the complexity estimates.
//! All decision variables are nonnegative; callers split free variables.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::problems::PolicySolution;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct LpConstraint {
    pub coeffs: Vec<f64>,
    pub bound: f64,
    pub sense: ConstraintSense,
}

impl LpConstraint {
    pub fn le(coeffs: Vec<f64>, bound: f64) -> Self {
        Self { coeffs, bound, sense: ConstraintSense::Le }
    }

    pub fn ge(coeffs: Vec<f64>, bound: f64) -> Self {
        Self { coeffs, bound, sense: ConstraintSense::Ge }
    }

    pub fn eq(coeffs: Vec<f64>, bound: f64) -> Self {
        Self { coeffs, bound, sense: ConstraintSense::Eq }
    }
}

/// Solve `opt c^T x` over `x >= 0` subject to the given rows, where `opt` is
/// max or min. Returns a vertex solution.
pub fn solve_lp(
    objective: &Array1<f64>,
    constraints: &[LpConstraint],
    maximize: bool,
) -> Result<PolicySolution> {
    let n = objective.len();
    if n == 0 {
        return Err(Error::InvalidInput("LP has no variables".into()));
    }
    for (i, c) in constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "constraint {i} has {} coefficients for {n} variables",
                c.coeffs.len()
            )));
        }
        if c.coeffs.iter().any(|v| !v.is_finite()) || !c.bound.is_finite() {
            return Err(Error::InvalidInput(format!("constraint {i} has non-finite data")));
        }
    }

    let mut tableau = Tableau::build(objective, constraints, maximize);
    tableau.phase_one()?;
    tableau.phase_two()?;
    let x = tableau.solution();
    let value: f64 = objective.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
    Ok(PolicySolution { policy: Array1::from(x), objective_value: value })
}

/// Row-major simplex tableau in canonical form. Column layout:
/// structural vars | slack/surplus | artificial, then the RHS.
struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    cost: Vec<f64>, // phase-2 cost over all columns (minimization)
    n_struct: usize,
    n_total: usize,
    first_artificial: usize,
}

impl Tableau {
    fn build(objective: &Array1<f64>, constraints: &[LpConstraint], maximize: bool) -> Self {
        let n = objective.len();
        let m = constraints.len();
        let mut n_slack = 0;
        for c in constraints {
            if c.sense != ConstraintSense::Eq {
                n_slack += 1;
            }
        }
        // Worst case every row needs an artificial.
        let first_artificial = n + n_slack;
        let n_total = first_artificial + m;

        let mut rows = vec![vec![0.0; n_total]; m];
        let mut rhs = vec![0.0; m];
        let mut basis = vec![usize::MAX; m];
        let mut slack_at = n;
        let mut art_at = first_artificial;
        let mut used_artificials = 0;

        for (i, c) in constraints.iter().enumerate() {
            let flip = c.bound < 0.0;
            let sign = if flip { -1.0 } else { 1.0 };
            for j in 0..n {
                rows[i][j] = sign * c.coeffs[j];
            }
            rhs[i] = sign * c.bound;
            let sense = match (c.sense, flip) {
                (ConstraintSense::Eq, _) => ConstraintSense::Eq,
                (ConstraintSense::Le, false) | (ConstraintSense::Ge, true) => ConstraintSense::Le,
                (ConstraintSense::Ge, false) | (ConstraintSense::Le, true) => ConstraintSense::Ge,
            };
            match sense {
                ConstraintSense::Le => {
                    rows[i][slack_at] = 1.0;
                    basis[i] = slack_at;
                    slack_at += 1;
                }
                ConstraintSense::Ge => {
                    rows[i][slack_at] = -1.0;
                    slack_at += 1;
                    rows[i][art_at] = 1.0;
                    basis[i] = art_at;
                    art_at += 1;
                    used_artificials += 1;
                }
                ConstraintSense::Eq => {
                    rows[i][art_at] = 1.0;
                    basis[i] = art_at;
                    art_at += 1;
                    used_artificials += 1;
                }
            }
        }
        let n_total_used = first_artificial + used_artificials;
        for row in &mut rows {
            row.truncate(n_total_used);
        }

        let mut cost = vec![0.0; n_total_used];
        for j in 0..n {
            cost[j] = if maximize { -objective[j] } else { objective[j] };
        }
        Tableau {
            rows,
            rhs,
            basis,
            cost,
            n_struct: n,
            n_total: n_total_used,
            first_artificial,
        }
    }

    /// Reduced costs for a minimization cost vector, given the current basis.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut r = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb == 0.0 {
                continue;
            }
            for j in 0..self.n_total {
                r[j] -= cb * self.rows[i][j];
            }
        }
        r
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col];
        for j in 0..self.n_total {
            self.rows[row][j] /= pivot;
        }
        self.rhs[row] /= pivot;
        for i in 0..self.rows.len() {
            if i == row {
                continue;
            }
            let factor = self.rows[i][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..self.n_total {
                self.rows[i][j] -= factor * self.rows[row][j];
            }
            self.rhs[i] -= factor * self.rhs[row];
        }
        self.basis[row] = col;
    }

    /// Bland's rule: entering = lowest-index improving column; leaving =
    /// minimum ratio, ties broken by the lowest basic variable index.
    fn iterate(&mut self, cost: &[f64], forbidden_from: usize) -> Result<()> {
        loop {
            let reduced = self.reduced_costs(cost);
            let entering = (0..forbidden_from).find(|&j| reduced[j] < -tol::LP_TOL);
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a > tol::LP_TOL {
                    let ratio = self.rhs[i] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - tol::LP_TOL
                                || ((ratio - br).abs() <= tol::LP_TOL
                                    && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leave else {
                return Err(Error::Unbounded(
                    "objective improves without limit along a ray".into(),
                ));
            };
            self.pivot(row, col);
        }
    }

    fn phase_one(&mut self) -> Result<()> {
        if self.first_artificial == self.n_total {
            return Ok(()); // no artificials needed
        }
        let mut cost = vec![0.0; self.n_total];
        for j in self.first_artificial..self.n_total {
            cost[j] = 1.0;
        }
        self.iterate(&cost, self.n_total)?;
        let infeasibility: f64 = self
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= self.first_artificial)
            .map(|(i, _)| self.rhs[i])
            .sum();
        if infeasibility > tol::LP_TOL {
            return Err(Error::Infeasible(format!(
                "phase-1 optimum {infeasibility:.3e} above tolerance"
            )));
        }
        // Drive any residual artificial out of the basis; a row with no
        // eligible pivot is redundant and pins the artificial at zero.
        for i in 0..self.rows.len() {
            if self.basis[i] >= self.first_artificial {
                if let Some(col) =
                    (0..self.first_artificial).find(|&j| self.rows[i][j].abs() > tol::LP_TOL)
                {
                    self.pivot(i, col);
                }
            }
        }
        Ok(())
    }

    fn phase_two(&mut self) -> Result<()> {
        let cost = self.cost.clone();
        // Artificial columns stay out of consideration.
        self.iterate(&cost, self.first_artificial)
    }

    fn solution(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n_struct];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                x[b] = self.rhs[i];
            }
        }
        x
    }
}
