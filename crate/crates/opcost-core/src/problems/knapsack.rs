//! The property-purchase subproblem: pick at most `capacity` items to
//! maximize total predicted value plus fixed costs.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::model::{LinearModel, UnlabeledSet};
use crate::problems::PolicySolution;

/// A 0/1 knapsack with a cardinality budget. Item values are the model's
/// predictions plus per-item fixed costs.
#[derive(Debug, Clone)]
pub struct KnapsackSpec {
    pub fixed_costs: Array1<f64>,
    pub capacity: usize,
}

impl KnapsackSpec {
    pub fn new(fixed_costs: Array1<f64>, capacity: usize) -> Result<Self> {
        if capacity > fixed_costs.len() {
            return Err(Error::InvalidInput(format!(
                "capacity {capacity} exceeds {} items",
                fixed_costs.len()
            )));
        }
        if fixed_costs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite fixed cost".into()));
        }
        Ok(Self { fixed_costs, capacity })
    }

    pub fn num_items(&self) -> usize {
        self.fixed_costs.len()
    }
}

/// Exact maximizer of `sum_i (beta^T x_i + c_i) pi_i` over `pi in {0,1}^m`
/// with `sum pi_i <= capacity`: the top-capacity strictly positive values
/// win, ties broken by lowest index.
pub fn opcost_knapsack(
    model: &LinearModel,
    spec: &KnapsackSpec,
    unl: &UnlabeledSet,
) -> Result<PolicySolution> {
    if unl.m() != spec.num_items() {
        return Err(Error::DimensionMismatch(format!(
            "{} unlabeled rows for {} knapsack items",
            unl.m(),
            spec.num_items()
        )));
    }
    let preds = unl.predictions(model)?;
    let values: Vec<f64> = preds
        .iter()
        .zip(spec.fixed_costs.iter())
        .map(|(p, c)| p + c)
        .collect();
    Ok(select_top_positive(&values, spec.capacity))
}

/// Shared selection rule; also used for the zero-fixed-cost budget checks.
pub(crate) fn select_top_positive(values: &[f64], capacity: usize) -> PolicySolution {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // Stable sort by descending value keeps the lowest index first on ties.
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());
    let mut policy = Array1::zeros(values.len());
    let mut objective = 0.0;
    let mut taken = 0;
    for &i in &order {
        if taken == capacity || values[i] <= 0.0 {
            break;
        }
        policy[i] = 1.0;
        objective += values[i];
        taken += 1;
    }
    PolicySolution { policy, objective_value: objective }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{arr1, Array2};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn identity_instance(values: &[f64]) -> (LinearModel, UnlabeledSet) {
        // One feature equal to the desired prediction.
        let m = values.len();
        let x = Array2::from_shape_fn((m, 1), |(i, _)| values[i]);
        (LinearModel::new(arr1(&[1.0])).unwrap(), UnlabeledSet::new(x).unwrap())
    }

    /// Brute force over every subset of size <= capacity.
    fn brute_force(values: &[f64], capacity: usize) -> f64 {
        let m = values.len();
        let mut best = 0.0f64;
        for mask in 0u32..(1 << m) {
            if mask.count_ones() as usize > capacity {
                continue;
            }
            let v: f64 = (0..m).filter(|&i| mask >> i & 1 == 1).map(|i| values[i]).sum();
            best = best.max(v);
        }
        best
    }

    #[test]
    fn six_item_example() {
        let values = [10.0, -1.0, 3.0, 7.0, 2.0, 5.0];
        let (model, unl) = identity_instance(&values);
        let spec = KnapsackSpec::new(arr1(&[0.0; 6]), 3).unwrap();
        let sol = opcost_knapsack(&model, &spec, &unl).unwrap();
        assert_eq!(sol.policy.to_vec(), vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        assert_abs_diff_eq!(sol.objective_value, 22.0, epsilon = 1e-12);
        assert_abs_diff_eq!(brute_force(&values, 3), 22.0, epsilon = 1e-12);
    }

    #[test]
    fn all_negative_selects_nothing() {
        let values = [-3.0, -1.0, -5.0];
        let (model, unl) = identity_instance(&values);
        let spec = KnapsackSpec::new(arr1(&[0.0; 3]), 2).unwrap();
        let sol = opcost_knapsack(&model, &spec, &unl).unwrap();
        assert_eq!(sol.policy.sum(), 0.0);
        assert_eq!(sol.objective_value, 0.0);
    }

    #[test]
    fn full_capacity_takes_everything_positive() {
        let values = [1.0, 2.0, 3.0];
        let (model, unl) = identity_instance(&values);
        let spec = KnapsackSpec::new(arr1(&[0.0; 3]), 3).unwrap();
        let sol = opcost_knapsack(&model, &spec, &unl).unwrap();
        assert_eq!(sol.policy.sum(), 3.0);
        assert_abs_diff_eq!(sol.objective_value, 6.0, epsilon = 1e-12);
    }

    #[test]
    fn tie_break_prefers_lowest_index() {
        let values = [4.0, 4.0, 4.0, 4.0];
        let sol = select_top_positive(&values, 2);
        assert_eq!(sol.policy.to_vec(), vec![1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..300 {
            let m = rng.gen_range(1..=8);
            let values: Vec<f64> = (0..m).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let capacity = rng.gen_range(0..=m);
            let sol = select_top_positive(&values, capacity);
            assert_abs_diff_eq!(
                sol.objective_value,
                brute_force(&values, capacity),
                epsilon = 1e-10
            );
            // The reported objective is recomputable from the policy.
            let recomputed: f64 = (0..m).map(|i| sol.policy[i] * values[i]).sum();
            assert_abs_diff_eq!(sol.objective_value, recomputed, epsilon = 1e-12);
        }
    }
}
