//! Coupled estimation: minimize training loss plus a signed multiple of the
//! inner decision problem's optimal value, then recompute the policy at the
//! fitted coefficients; sweep the coupling strength to map the cost range.

pub mod nelder_mead;
pub mod sweep;

pub use nelder_mead::{nelder_mead_minimize, NelderMeadConfig, NelderMeadResult};
pub use sweep::{sweep_c1, SweepFailure, SweepReport, SweepRow};

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::model::{least_squares_loss, ridge_closed_form, Dataset, LinearModel, UnlabeledSet};
use crate::problems::{InnerSense, OpCostProblem, PolicySolution};

/// Whether near-equally-accurate models should be tilted toward lower or
/// higher operational outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bias {
    Optimistic,
    Pessimistic,
}

impl Bias {
    /// Sign of the cost term in the training objective.
    ///
    /// Minimizing `+ c1 * (inner value)` drives the inner value down, which
    /// is optimism for a cost and pessimism for a value; the other two
    /// pairings flip the sign.
    pub fn cost_sign(self, sense: InnerSense) -> f64 {
        match (self, sense) {
            (Bias::Optimistic, InnerSense::MinCost) | (Bias::Pessimistic, InnerSense::MaxValue) => {
                1.0
            }
            _ => -1.0,
        }
    }
}

/// Settings for one coupled fit.
#[derive(Debug, Clone)]
pub struct SimultaneousConfig<'a> {
    pub c1: f64,
    pub c2: f64,
    pub bias: Bias,
    pub problem: &'a OpCostProblem,
}

impl SimultaneousConfig<'_> {
    pub fn validate(&self) -> Result<()> {
        if !(self.c1 >= 0.0 && self.c1.is_finite()) {
            return Err(Error::InvalidInput("c1 must be finite and >= 0".into()));
        }
        if !(self.c2 >= 0.0 && self.c2.is_finite()) {
            return Err(Error::InvalidInput("c2 must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Training objective: squared loss, ridge penalty, and the signed cost term.
/// With `c1 = 0` the inner problem is never solved and the objective is the
/// plain ridge objective.
pub fn objective_value(
    beta: &Array1<f64>,
    data: &Dataset,
    unl: &UnlabeledSet,
    cfg: &SimultaneousConfig,
) -> Result<f64> {
    cfg.validate()?;
    let model = LinearModel::new(beta.clone())?;
    let mut value = least_squares_loss(&model, data)? + cfg.c2 * beta.dot(beta);
    if cfg.c1 != 0.0 {
        let inner = cfg.problem.solve_inner(&model, unl)?;
        value += cfg.bias.cost_sign(cfg.problem.inner_sense()) * cfg.c1 * inner.objective_value;
    }
    Ok(value)
}

/// Outcome of a coupled fit: the model, its best-response policy, and solver
/// diagnostics.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: LinearModel,
    pub policy: PolicySolution,
    pub objective: f64,
    pub converged: bool,
    pub evals: usize,
}

/// Step 1 minimizes [`objective_value`] by multi-start Nelder-Mead (the ridge
/// solution is always one start); Step 2 re-solves the inner problem at the
/// fitted coefficients.
pub fn fit_simultaneous(
    data: &Dataset,
    unl: &UnlabeledSet,
    cfg: &SimultaneousConfig,
    nm: &NelderMeadConfig,
) -> Result<FitResult> {
    fit_simultaneous_with_starts(data, unl, cfg, nm, &[])
}

/// [`fit_simultaneous`] with extra deterministic start points (used by the
/// sweep to warm-start from the previous grid point's solution).
pub fn fit_simultaneous_with_starts(
    data: &Dataset,
    unl: &UnlabeledSet,
    cfg: &SimultaneousConfig,
    nm: &NelderMeadConfig,
    extra_starts: &[Array1<f64>],
) -> Result<FitResult> {
    cfg.validate()?;
    if data.p() != unl.p() {
        return Err(Error::DimensionMismatch(format!(
            "training data has {} features, unlabeled set has {}",
            data.p(),
            unl.p()
        )));
    }
    let mut starts = vec![ridge_start(data, cfg.c2)?];
    starts.extend_from_slice(extra_starts);
    let mut objective = |beta: &Array1<f64>| objective_value(beta, data, unl, cfg);
    let res = nelder_mead::minimize_multi_start(&mut objective, &starts, nm)?;
    let model = LinearModel::new(res.beta)?;
    let policy = cfg.problem.solve_inner(&model, unl)?;
    Ok(FitResult {
        model,
        policy,
        objective: res.value,
        converged: res.converged,
        evals: res.evals,
    })
}

/// The decoupled baseline: fit the ridge objective alone. Identical to
/// [`fit_simultaneous`] at `c1 = 0` under the same seed.
pub fn fit_sequential(data: &Dataset, c2: f64, nm: &NelderMeadConfig) -> Result<FitResult2> {
    if !(c2 >= 0.0 && c2.is_finite()) {
        return Err(Error::InvalidInput("c2 must be finite and >= 0".into()));
    }
    let starts = vec![ridge_start(data, c2)?];
    let mut objective = |beta: &Array1<f64>| {
        let model = LinearModel::new(beta.clone())?;
        Ok(least_squares_loss(&model, data)? + c2 * beta.dot(beta))
    };
    let res = nelder_mead::minimize_multi_start(&mut objective, &starts, nm)?;
    Ok(FitResult2 {
        model: LinearModel::new(res.beta)?,
        objective: res.value,
        converged: res.converged,
    })
}

/// A sequential fit has no policy attached.
#[derive(Debug, Clone)]
pub struct FitResult2 {
    pub model: LinearModel,
    pub objective: f64,
    pub converged: bool,
}

/// Closed-form ridge start; falls back to a lightly regularized solve when
/// the plain normal equations are singular.
fn ridge_start(data: &Dataset, c2: f64) -> Result<Array1<f64>> {
    match ridge_closed_form(data, c2) {
        Ok(m) => Ok(m.beta),
        Err(Error::Singular(_)) => Ok(ridge_closed_form(data, c2.max(1e-8))?.beta),
        Err(e) => Err(e),
    }
}
