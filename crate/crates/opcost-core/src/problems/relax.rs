//! Relaxations that convert an operational-cost budget into a constraint on
//! the coefficient vector. Each relaxation is one-directional: any beta whose
//! exact cost meets the budget satisfies the relaxed constraint; the converse
//! may fail.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::model::UnlabeledSet;
use crate::problems::dag::{for_each_path, PrecedenceDag};
use crate::problems::knapsack::KnapsackSpec;
use crate::problems::staffing::StaffingSpec;
use crate::problems::{LinearConstraintOnBeta, QuadraticConstraintOnBeta};

/// Average, over all source-sink paths, of the summed station features along
/// the path. The minimum makespan dominates every path time and hence this
/// average, so a makespan budget `alpha` implies `z^T beta <= alpha`.
pub fn relax_scheduling_constraint(
    dag: &PrecedenceDag,
    unl: &UnlabeledSet,
    alpha: f64,
) -> Result<LinearConstraintOnBeta> {
    if let Some(max_idx) = dag.max_instance_index() {
        if max_idx >= unl.m() {
            return Err(Error::InvalidInput(format!(
                "edge refers to instance {max_idx} but unlabeled set has {} rows",
                unl.m()
            )));
        }
    }
    let p = unl.p();
    let mut z_sum = Array1::<f64>::zeros(p);
    let count = for_each_path(dag, |edges| {
        for &i in edges {
            let idx = dag.edges()[i].instance_index;
            z_sum += &unl.x.row(idx);
        }
    })?;
    if count == 0 {
        return Err(Error::InvalidInput("no source-sink path".into()));
    }
    Ok(LinearConstraintOnBeta { z: z_sum / count as f64, alpha })
}

/// The half-weights feasible point of the cardinality-knapsack relaxation:
/// a value budget `alpha` (fixed costs excluded) implies
/// `(1/2) sum_i x_i^T beta <= alpha`.
///
/// The all-halves point is only feasible for the fractional problem when
/// `2 * capacity >= m`, so that is a checked precondition.
pub fn relax_knapsack_constraint(
    spec: &KnapsackSpec,
    unl: &UnlabeledSet,
    alpha: f64,
) -> Result<LinearConstraintOnBeta> {
    if unl.m() != spec.num_items() {
        return Err(Error::DimensionMismatch(format!(
            "{} unlabeled rows for {} knapsack items",
            unl.m(),
            spec.num_items()
        )));
    }
    if 2 * spec.capacity < spec.num_items() {
        return Err(Error::InvalidInput(format!(
            "half-weights relaxation needs capacity >= m/2 (capacity {}, m {})",
            spec.capacity,
            spec.num_items()
        )));
    }
    let mut z = Array1::<f64>::zeros(unl.p());
    for row in unl.x.rows() {
        z += &row;
    }
    Ok(LinearConstraintOnBeta { z: z * 0.5, alpha })
}

/// Dual-certificate relaxation of the staffing budget: with every shift
/// spanning at most `max_periods_per_shift` periods, the uniform dual weight
/// `1/max_periods` is feasible and a staffing budget `alpha` implies
/// `sum_i (beta^T x_i)^2 <= max_periods * alpha`.
///
/// Emitted for reporting only; the bound engine consumes linear constraints.
pub fn relax_staffing_constraint(
    spec: &StaffingSpec,
    unl: &UnlabeledSet,
    alpha: f64,
) -> Result<QuadraticConstraintOnBeta> {
    if unl.m() != spec.num_periods() {
        return Err(Error::DimensionMismatch(format!(
            "{} unlabeled rows for {} periods",
            unl.m(),
            spec.num_periods()
        )));
    }
    let q = unl.x.t().dot(&unl.x);
    Ok(QuadraticConstraintOnBeta { q, bound: spec.max_periods_per_shift as f64 * alpha })
}
