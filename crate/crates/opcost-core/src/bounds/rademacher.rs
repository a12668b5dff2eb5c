//! Monte-Carlo estimation of the empirical Rademacher complexity of the
//! constrained class, with exact per-sign suprema where the geometry allows.

use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::bounds::HypothesisClassSpec;
use crate::error::{Error, Result};
use crate::problems::lp::{solve_lp, LpConstraint};

#[derive(Debug, Clone)]
pub struct RademacherEstimate {
    pub estimate: f64,
    pub std_error: f64,
    /// True when the per-sign supremum itself was approximated by a grid
    /// (the l2 ball with extra linear constraints).
    pub approximate: bool,
}

const GRID_PER_AXIS: usize = 41;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

enum SupRoute {
    /// q = 2, no constraints: the supremum is `b_b * ||X^T sigma||_2`.
    BallClosedForm,
    /// q = 1: exact linear program over the split positive/negative parts.
    L1Lp,
    /// q = 2 with constraints, p <= 3: fine grid, flagged approximate.
    BallGrid(Vec<Array1<f64>>),
}

fn pick_route(spec: &HypothesisClassSpec) -> Result<SupRoute> {
    let q = spec.q();
    if close(q, 2.0) && spec.num_constraints() == 0 {
        return Ok(SupRoute::BallClosedForm);
    }
    if close(q, 1.0) {
        return Ok(SupRoute::L1Lp);
    }
    if close(q, 2.0) && spec.p <= 3 {
        let mut grid = Vec::new();
        let steps = GRID_PER_AXIS;
        let total = steps.pow(spec.p as u32);
        for flat in 0..total {
            let mut beta = Array1::zeros(spec.p);
            let mut rest = flat;
            for j in 0..spec.p {
                let idx = rest % steps;
                rest /= steps;
                beta[j] = -spec.b_b + 2.0 * spec.b_b * idx as f64 / (steps - 1) as f64;
            }
            if spec.contains(&beta) {
                grid.push(beta);
            }
        }
        if grid.is_empty() {
            return Err(Error::Infeasible("constraint set has no grid point".into()));
        }
        return Ok(SupRoute::BallGrid(grid));
    }
    Err(Error::Unsupported(format!(
        "Rademacher supremum for q = {q:.3} with {} constraints at p = {}",
        spec.num_constraints(),
        spec.p
    )))
}

/// `sup_{beta in B} (2/n) sigma^T X beta` for one sign vector.
fn sup_for_sigma(
    x_s: &Array2<f64>,
    spec: &HypothesisClassSpec,
    route: &SupRoute,
    sigma: &Array1<f64>,
) -> Result<f64> {
    let n = x_s.nrows() as f64;
    let xt_sigma = x_s.t().dot(sigma);
    match route {
        SupRoute::BallClosedForm => Ok(2.0 / n * spec.b_b * xt_sigma.dot(&xt_sigma).sqrt()),
        SupRoute::BallGrid(grid) => {
            let mut best = f64::NEG_INFINITY;
            for beta in grid {
                best = best.max(xt_sigma.dot(beta));
            }
            Ok(2.0 / n * best)
        }
        SupRoute::L1Lp => {
            // beta = u - v with u, v >= 0; sum(u + v) <= b_b plus the caps.
            let p = spec.p;
            let mut objective = Array1::zeros(2 * p);
            for j in 0..p {
                objective[j] = xt_sigma[j];
                objective[p + j] = -xt_sigma[j];
            }
            let mut rows = vec![LpConstraint::le(vec![1.0; 2 * p], spec.b_b)];
            for c in &spec.constraints {
                let mut coeffs = vec![0.0; 2 * p];
                for j in 0..p {
                    coeffs[j] = c.c[j];
                    coeffs[p + j] = -c.c[j];
                }
                rows.push(LpConstraint::le(coeffs, 1.0 - c.delta));
            }
            let sol = solve_lp(&objective, &rows, true)?;
            Ok(2.0 / n * sol.objective_value)
        }
    }
}

/// Monte-Carlo mean and standard error of the per-sign supremum over
/// `num_sigma_samples` Rademacher draws.
pub fn empirical_rademacher_mc(
    x_s: &Array2<f64>,
    spec: &HypothesisClassSpec,
    num_sigma_samples: usize,
    seed: u64,
) -> Result<RademacherEstimate> {
    if x_s.ncols() != spec.p {
        return Err(Error::DimensionMismatch("sample matrix columns != dimension".into()));
    }
    if num_sigma_samples == 0 {
        return Err(Error::InvalidInput("need at least one sign sample".into()));
    }
    let route = pick_route(spec)?;
    let n = x_s.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..num_sigma_samples {
        let sigma = Array1::from_shape_fn(n, |_| if rng.gen::<bool>() { 1.0 } else { -1.0 });
        let v = sup_for_sigma(x_s, spec, &route, &sigma)?;
        sum += v;
        sum_sq += v * v;
    }
    let m = num_sigma_samples as f64;
    let mean = sum / m;
    let var = (sum_sq / m - mean * mean).max(0.0) * if m > 1.0 { m / (m - 1.0) } else { 0.0 };
    Ok(RademacherEstimate {
        estimate: mean,
        std_error: (var / m).sqrt(),
        approximate: matches!(route, SupRoute::BallGrid(_)),
    })
}

/// Exact expectation by full enumeration of the 2^n sign patterns; n is
/// capped to keep this a deliberate desk-scale tool.
pub fn empirical_rademacher_exact(x_s: &Array2<f64>, spec: &HypothesisClassSpec) -> Result<f64> {
    let n = x_s.nrows();
    if n > 20 {
        return Err(Error::SizeLimit("exact enumeration capped at n = 20".into()));
    }
    if x_s.ncols() != spec.p {
        return Err(Error::DimensionMismatch("sample matrix columns != dimension".into()));
    }
    let route = pick_route(spec)?;
    let mut total = 0.0;
    for mask in 0u64..(1 << n) {
        let sigma =
            Array1::from_shape_fn(n, |i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 });
        total += sup_for_sigma(x_s, spec, &route, &sigma)?;
    }
    Ok(total / (1u64 << n) as f64)
}
