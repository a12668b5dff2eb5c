//! Shift staffing: cover per-period demand, derived from squared predictions,
//! with the fewest integer staff across a fixed set of shifts.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::model::{LinearModel, UnlabeledSet};
use crate::problems::PolicySolution;
use crate::tol;

/// Which half-hour periods each shift covers, plus the cap on how many
/// periods one person may work (which also certifies the dual weight used by
/// the quadratic relaxation).
#[derive(Debug, Clone)]
pub struct StaffingSpec {
    /// periods x shifts, entries 0/1.
    pub coverage: Array2<u8>,
    pub max_periods_per_shift: usize,
}

impl StaffingSpec {
    pub fn new(coverage: Array2<u8>, max_periods_per_shift: usize) -> Result<Self> {
        let (periods, shifts) = coverage.dim();
        if periods == 0 || shifts == 0 {
            return Err(Error::InvalidInput("coverage matrix must be non-empty".into()));
        }
        if coverage.iter().any(|&v| v > 1) {
            return Err(Error::InvalidInput("coverage entries must be 0 or 1".into()));
        }
        for i in 0..periods {
            if (0..shifts).all(|j| coverage[(i, j)] == 0) {
                return Err(Error::InvalidInput(format!("period {i} is covered by no shift")));
            }
        }
        for j in 0..shifts {
            let len: usize = (0..periods).map(|i| coverage[(i, j)] as usize).sum();
            if len > max_periods_per_shift {
                return Err(Error::InvalidInput(format!(
                    "shift {j} spans {len} periods, above the cap {max_periods_per_shift}"
                )));
            }
        }
        Ok(Self { coverage, max_periods_per_shift })
    }

    pub fn num_periods(&self) -> usize {
        self.coverage.nrows()
    }

    pub fn num_shifts(&self) -> usize {
        self.coverage.ncols()
    }

    /// The three-shift day used throughout: 24 half-hour periods, shifts
    /// covering periods 0-9, 7-16 and 14-23, ten periods each.
    pub fn three_shift_day() -> Self {
        let mut coverage = Array2::zeros((24, 3));
        for i in 0..10 {
            coverage[(i, 0)] = 1;
        }
        for i in 7..17 {
            coverage[(i, 1)] = 1;
        }
        for i in 14..24 {
            coverage[(i, 2)] = 1;
        }
        Self::new(coverage, 10).expect("static instance is valid")
    }
}

/// Exact minimizer of total staff subject to `a_i^T pi >= (beta^T x_i)^2`
/// over nonnegative integer vectors, by bounded depth-first search with
/// branch-and-bound pruning.
pub fn opcost_staffing(
    model: &LinearModel,
    spec: &StaffingSpec,
    unl: &UnlabeledSet,
) -> Result<PolicySolution> {
    if unl.m() != spec.num_periods() {
        return Err(Error::DimensionMismatch(format!(
            "{} unlabeled rows for {} periods",
            unl.m(),
            spec.num_periods()
        )));
    }
    let preds = unl.predictions(model)?;
    let demands: Vec<f64> = preds.iter().map(|p| p * p).collect();
    staffing_with_demands(spec, &demands)
}

/// Same search with explicit real-valued demands.
pub fn staffing_with_demands(spec: &StaffingSpec, demands: &[f64]) -> Result<PolicySolution> {
    if demands.len() != spec.num_periods() {
        return Err(Error::DimensionMismatch("demand length != periods".into()));
    }
    if demands.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(Error::InvalidInput("demands must be finite and nonnegative".into()));
    }
    let shifts = spec.num_shifts();
    let max_demand = demands.iter().cloned().fold(0.0f64, f64::max);
    let cap = max_demand.ceil() as u64;
    if cap == 0 {
        return Ok(PolicySolution {
            policy: Array1::zeros(shifts),
            objective_value: 0.0,
        });
    }

    // Any coordinate above `cap` can be clamped to `cap` without losing
    // feasibility (every period has a covering shift), so the box search is
    // exhaustive over optimal candidates.
    // For each period, the last shift that covers it: once that shift is
    // fixed, the period's constraint is decided and can prune the branch.
    let periods = spec.num_periods();
    let last_cover: Vec<usize> = (0..periods)
        .map(|i| (0..shifts).rev().find(|&j| spec.coverage[(i, j)] == 1).unwrap())
        .collect();

    struct Search<'a> {
        spec: &'a StaffingSpec,
        demands: &'a [f64],
        last_cover: &'a [usize],
        cap: u64,
        assignment: Vec<u64>,
        best_sum: u64,
        best: Option<Vec<u64>>,
    }

    impl Search<'_> {
        fn go(&mut self, shift: usize, partial_sum: u64) {
            if partial_sum >= self.best_sum {
                return;
            }
            if shift == self.spec.num_shifts() {
                self.best_sum = partial_sum;
                self.best = Some(self.assignment.clone());
                return;
            }
            'values: for v in 0..=self.cap {
                if partial_sum + v >= self.best_sum {
                    break;
                }
                self.assignment[shift] = v;
                // Periods decided once this shift is fixed must be satisfied.
                for i in 0..self.spec.num_periods() {
                    if self.last_cover[i] == shift {
                        let got: u64 = (0..=shift)
                            .map(|j| self.spec.coverage[(i, j)] as u64 * self.assignment[j])
                            .sum();
                        if (got as f64) < self.demands[i] {
                            continue 'values;
                        }
                    }
                }
                self.go(shift + 1, partial_sum + v);
            }
            self.assignment[shift] = 0;
        }
    }

    let mut search = Search {
        spec,
        demands,
        last_cover: &last_cover,
        cap,
        assignment: vec![0; shifts],
        best_sum: u64::MAX,
        best: None,
    };
    search.go(0, 0);
    let best = search
        .best
        .ok_or_else(|| Error::Infeasible("no staffing covers the demand".into()))?;
    let objective = search.best_sum as f64;
    Ok(PolicySolution {
        policy: Array1::from(best.iter().map(|&v| v as f64).collect::<Vec<_>>()),
        objective_value: objective,
    })
}

/// Verify that a staffing vector covers all demands.
pub fn check_staffing_feasible(spec: &StaffingSpec, demands: &[f64], pi: &Array1<f64>) -> Result<()> {
    if pi.len() != spec.num_shifts() {
        return Err(Error::DimensionMismatch("staffing length != shifts".into()));
    }
    for i in 0..spec.num_periods() {
        let got: f64 = (0..spec.num_shifts())
            .map(|j| spec.coverage[(i, j)] as f64 * pi[j])
            .sum();
        if got + tol::POLICY_FEAS_TOL < demands[i] {
            return Err(Error::Internal(format!("period {i} under-covered")));
        }
    }
    Ok(())
}
