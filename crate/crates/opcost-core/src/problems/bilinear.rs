//! Bilinear policy games over a finite policy grid. The cost
//! `pi^T M beta + c^T pi` is linear in each argument, which is what the
//! saddle-point equivalence machinery requires.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::problems::PolicySolution;

/// A game whose policies come from an explicit finite grid discretizing a
/// compact convex set.
#[derive(Debug, Clone)]
pub struct BilinearGame {
    /// policy_dim x p interaction matrix.
    pub interaction: Array2<f64>,
    /// Direct per-policy cost, policy_dim entries.
    pub policy_cost: Array1<f64>,
    /// The policy grid; all points share `policy_dim` coordinates.
    pub policies: Vec<Array1<f64>>,
}

impl BilinearGame {
    pub fn new(
        interaction: Array2<f64>,
        policy_cost: Array1<f64>,
        policies: Vec<Array1<f64>>,
    ) -> Result<Self> {
        let dim = interaction.nrows();
        if policy_cost.len() != dim {
            return Err(Error::DimensionMismatch(
                "policy cost length != interaction rows".into(),
            ));
        }
        if policies.is_empty() {
            return Err(Error::InvalidInput("empty policy grid".into()));
        }
        if policies.iter().any(|pi| pi.len() != dim) {
            return Err(Error::DimensionMismatch("policy grid point of wrong dimension".into()));
        }
        Ok(Self { interaction, policy_cost, policies })
    }

    pub fn policy_dim(&self) -> usize {
        self.interaction.nrows()
    }

    pub fn coefficient_dim(&self) -> usize {
        self.interaction.ncols()
    }

    pub fn op_cost(&self, pi: &Array1<f64>, beta: &Array1<f64>) -> f64 {
        pi.dot(&self.interaction.dot(beta)) + self.policy_cost.dot(pi)
    }

    /// The lowest-cost policy on the grid for a fixed beta; the first
    /// minimizer in grid order wins, which keeps results deterministic.
    pub fn best_response(&self, beta: &Array1<f64>) -> Result<PolicySolution> {
        if beta.len() != self.coefficient_dim() {
            return Err(Error::DimensionMismatch(format!(
                "beta has {} entries, game wants {}",
                beta.len(),
                self.coefficient_dim()
            )));
        }
        let effect = self.interaction.dot(beta) + &self.policy_cost;
        let mut best_idx = 0;
        let mut best_val = f64::INFINITY;
        for (i, pi) in self.policies.iter().enumerate() {
            let v = pi.dot(&effect);
            if v < best_val {
                best_val = v;
                best_idx = i;
            }
        }
        Ok(PolicySolution {
            policy: self.policies[best_idx].clone(),
            objective_value: best_val,
        })
    }

    /// A Lipschitz constant of the cost in the policy argument, valid over
    /// any beta with `||beta||_2 <= beta_radius`.
    pub fn policy_lipschitz(&self, beta_radius: f64) -> f64 {
        // ||M beta + c||_2 <= ||M||_F * radius + ||c||_2.
        let m_frob = self.interaction.iter().map(|v| v * v).sum::<f64>().sqrt();
        let c_norm = self.policy_cost.dot(&self.policy_cost).sqrt();
        m_frob * beta_radius + c_norm
    }

    /// A Lipschitz constant of the cost in beta, over the policy grid.
    pub fn beta_lipschitz(&self) -> f64 {
        let m_frob = self.interaction.iter().map(|v| v * v).sum::<f64>().sqrt();
        let pi_radius = self
            .policies
            .iter()
            .map(|pi| pi.dot(pi).sqrt())
            .fold(0.0f64, f64::max);
        m_frob * pi_radius
    }
}

/// Evenly spaced grid over a box, in row-major order over the axes.
pub fn box_policy_grid(bounds: &[(f64, f64)], points_per_axis: usize) -> Result<Vec<Array1<f64>>> {
    if bounds.is_empty() || points_per_axis < 2 {
        return Err(Error::InvalidInput("box grid needs >= 1 axis and >= 2 points".into()));
    }
    for &(lo, hi) in bounds {
        if !(lo < hi) {
            return Err(Error::InvalidInput("box grid bounds must satisfy lo < hi".into()));
        }
    }
    let dim = bounds.len();
    let total = points_per_axis.pow(dim as u32);
    let mut grid = Vec::with_capacity(total);
    for flat in 0..total {
        let mut point = Array1::zeros(dim);
        let mut rest = flat;
        for (axis, &(lo, hi)) in bounds.iter().enumerate() {
            let idx = rest % points_per_axis;
            rest /= points_per_axis;
            point[axis] = lo + (hi - lo) * idx as f64 / (points_per_axis - 1) as f64;
        }
        grid.push(point);
    }
    Ok(grid)
}

/// Grid over the segment simplex `{(t, 1-t): t in [0,1]}`.
pub fn segment_simplex_grid(points: usize) -> Result<Vec<Array1<f64>>> {
    if points < 2 {
        return Err(Error::InvalidInput("simplex grid needs >= 2 points".into()));
    }
    Ok((0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            Array1::from(vec![t, 1.0 - t])
        })
        .collect())
}
