//! Exact desk-scale solvers for the decision subproblems, plus the
//! relaxations that turn cost budgets into constraints on the coefficients.

pub mod bilinear;
pub mod dag;
pub mod knapsack;
pub mod lp;
pub mod relax;
pub mod staffing;

pub use bilinear::BilinearGame;
pub use dag::PrecedenceDag;
pub use knapsack::KnapsackSpec;
pub use staffing::StaffingSpec;

use ndarray::{Array1, Array2};

use crate::error::Result;
use crate::model::{LinearModel, UnlabeledSet};

/// A solved policy together with its objective value. The objective is always
/// recomputable from the policy and the problem description.
#[derive(Debug, Clone)]
pub struct PolicySolution {
    /// Event times for scheduling, 0/1 picks for knapsack, staff counts for
    /// staffing, the chosen grid point for bilinear games.
    pub policy: Array1<f64>,
    pub objective_value: f64,
}

/// A linear constraint `z^T beta <= alpha` derived from a cost budget.
#[derive(Debug, Clone)]
pub struct LinearConstraintOnBeta {
    pub z: Array1<f64>,
    pub alpha: f64,
}

impl LinearConstraintOnBeta {
    pub fn holds(&self, beta: &Array1<f64>) -> bool {
        self.z.dot(beta) <= self.alpha
    }
}

/// A quadratic constraint `beta^T Q beta <= bound`, emitted for reporting
/// only; the bound engine consumes linear constraints exclusively.
#[derive(Debug, Clone)]
pub struct QuadraticConstraintOnBeta {
    pub q: Array2<f64>,
    pub bound: f64,
}

impl QuadraticConstraintOnBeta {
    pub fn holds(&self, beta: &Array1<f64>) -> bool {
        beta.dot(&self.q.dot(beta)) <= self.bound
    }
}

/// Whether the inner decision problem minimizes a cost or maximizes a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerSense {
    MinCost,
    MaxValue,
}

/// Tagged description of the decision subproblem coupled to the regression.
#[derive(Debug, Clone)]
pub enum OpCostProblem {
    Scheduling { dag: PrecedenceDag },
    Knapsack { spec: KnapsackSpec },
    Staffing { spec: StaffingSpec },
    Bilinear { game: BilinearGame },
}

impl OpCostProblem {
    pub fn inner_sense(&self) -> InnerSense {
        match self {
            OpCostProblem::Knapsack { .. } => InnerSense::MaxValue,
            _ => InnerSense::MinCost,
        }
    }

    /// Solve the inner problem exactly at the given model.
    pub fn solve_inner(&self, model: &LinearModel, unl: &UnlabeledSet) -> Result<PolicySolution> {
        match self {
            OpCostProblem::Scheduling { dag } => dag::opcost_scheduling(model, dag, unl),
            OpCostProblem::Knapsack { spec } => knapsack::opcost_knapsack(model, spec, unl),
            OpCostProblem::Staffing { spec } => staffing::opcost_staffing(model, spec, unl),
            OpCostProblem::Bilinear { game } => game.best_response(&model.beta),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            OpCostProblem::Scheduling { .. } => "scheduling",
            OpCostProblem::Knapsack { .. } => "knapsack",
            OpCostProblem::Staffing { .. } => "staffing",
            OpCostProblem::Bilinear { .. } => "bilinear",
        }
    }
}
