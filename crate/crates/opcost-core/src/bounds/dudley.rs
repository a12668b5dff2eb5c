//! The entropy integral: converts the covering-number bound into a
//! complexity bound, evaluated so the numerical value is itself a certified
//! upper bound on the integral.

use std::collections::BTreeMap;

use crate::bounds::covering::{compute_k0, DEFAULT_PRECISION_DENOMINATOR};
use crate::bounds::lattice::{
    count_constrained_lattice, ln_l1_count, predicted_l1_count, LatticeCountQuery,
};
use crate::bounds::rationalize::rationalize_constraints;
use crate::bounds::{scale_data, HypothesisClassSpec, ScaledData};
use crate::error::{Error, Result};
use crate::tol;

/// Bound on the scaled empirical complexity:
/// `12 * x_b * b_b * integral_0^{x_b b_b} sqrt(2 ln N(sqrt(n) a) / n) da`.
///
/// The integrand is non-increasing, so a left-endpoint sum over a log-spaced
/// partition of `[alpha_min, x_b b_b]` upper-bounds that stretch; the
/// remaining `(0, alpha_min)` sliver is covered by an analytic tail bound.
/// Doubling `grid_size` refines the partition in place (the grids nest), so
/// the value never increases under refinement.
pub fn dudley_rademacher_bound(
    spec: &HypothesisClassSpec,
    x_s: &ndarray::Array2<f64>,
    grid_size: usize,
) -> Result<f64> {
    let scaled = scale_data(x_s, spec)?;
    dudley_bound_scaled(spec, &scaled, grid_size)
}

pub(crate) fn dudley_bound_scaled(
    spec: &HypothesisClassSpec,
    scaled: &ScaledData,
    grid_size: usize,
) -> Result<f64> {
    if grid_size < 1 {
        return Err(Error::InvalidInput("grid size must be >= 1".into()));
    }
    let xb_bb = spec.x_b * spec.b_b;
    let n = scaled.n as f64;
    let alpha_min = tol::DUDLEY_ALPHA_MIN_RATIO * xb_bb;

    // The constrained level K = max(K0(alpha), K_margin) stops depending on
    // alpha once K0 <= K_margin; in that regime the constrained count is a
    // single cached value. For smaller alpha the unconstrained closed form is
    // used alone; it is still a valid covering upper bound.
    let k_margin: Option<u64> = if scaled.constraint_margin().is_some() && !scaled.is_vacuous() {
        let margin = scaled.constraint_margin().unwrap();
        let term = n * xb_bb * xb_bb / (scaled.lambda_min * margin * margin);
        (term.ceil() <= u64::MAX as f64).then(|| (term.ceil() as u64).max(1))
    } else {
        None
    };
    let mut constrained_cache: BTreeMap<u64, Option<f64>> = BTreeMap::new();
    let mut ln_cover = |alpha: f64| -> Result<f64> {
        if alpha >= xb_bb {
            return Ok(0.0);
        }
        let k0 = compute_k0(alpha, spec.x_b, spec.b_b)?;
        let mut best = ln_l1_count(spec.p, k0);
        if let Some(km) = k_margin {
            if k0 <= km {
                let entry = constrained_cache.entry(km).or_insert_with(|| {
                    ln_constrained_count(spec, scaled, km)
                });
                if let Some(lnc) = *entry {
                    best = best.min(lnc);
                }
            }
        }
        Ok(best)
    };

    // Nested log-spaced partition boundaries of [alpha_min, xb_bb].
    let g = grid_size;
    let ratio = (xb_bb / alpha_min).powf(1.0 / g as f64);
    let mut sum = 0.0;
    let mut left = alpha_min;
    for i in 0..g {
        let right = if i + 1 == g { xb_bb } else { alpha_min * ratio.powi(i as i32 + 1) };
        let integrand = (2.0 * ln_cover(left)? / n).sqrt();
        sum += (right - left) * integrand;
        left = right;
    }

    // Tail bound for (0, alpha_min): ln N(sqrt(n) a) <= 2 p ln(C / a) with
    // C = sqrt(5) xb_bb, and the integral of sqrt(ln(C/a)) over (0, s]
    // is at most s (sqrt(ln(C/s)) + 1) for ln(C/s) >= 1.
    let c = 5.0f64.sqrt() * xb_bb;
    let sliver = {
        let lead = (4.0 * spec.p as f64 / n).sqrt();
        let ln_ratio = (c / alpha_min).ln();
        debug_assert!(ln_ratio >= 1.0);
        lead * alpha_min * (ln_ratio.sqrt() + 1.0)
    };

    Ok(12.0 * xb_bb * (sliver + sum))
}

fn ln_constrained_count(spec: &HypothesisClassSpec, scaled: &ScaledData, k: u64) -> Option<f64> {
    if predicted_l1_count(spec.p, k) > tol::DUDLEY_ENUM_CAP {
        return None;
    }
    let mut constraints = Vec::with_capacity(spec.num_constraints());
    for nu in 0..spec.num_constraints() {
        let row: Vec<f64> = scaled.c_tilde.row(nu).to_vec();
        constraints.push(rationalize_constraints(&row, k, DEFAULT_PRECISION_DENOMINATOR).ok()?);
    }
    let count =
        count_constrained_lattice(&LatticeCountQuery { p: spec.p, k, constraints }).ok()?;
    Some((count.max(1) as f64).ln())
}

/// The full high-probability excess-risk bound: empirical risk plus the
/// Lipschitz-scaled entropy integral plus the confidence deviation term.
pub fn generalization_bound(
    r_emp: f64,
    lipschitz: f64,
    n: usize,
    confidence_delta: f64,
    spec: &HypothesisClassSpec,
    x_s: &ndarray::Array2<f64>,
) -> Result<f64> {
    if !(lipschitz > 0.0) {
        return Err(Error::InvalidInput("Lipschitz constant must be > 0".into()));
    }
    if !(confidence_delta > 0.0 && confidence_delta <= 1.0) {
        return Err(Error::InvalidInput("confidence delta must be in (0, 1]".into()));
    }
    if x_s.nrows() != n {
        return Err(Error::DimensionMismatch("sample matrix rows != n".into()));
    }
    let dudley = dudley_rademacher_bound(spec, x_s, tol::DUDLEY_DEFAULT_GRID)?;
    let deviation =
        (3.0 / std::f64::consts::SQRT_2) * ((1.0 / confidence_delta).ln() / n as f64).sqrt();
    Ok(r_emp + lipschitz * dudley + deviation)
}
