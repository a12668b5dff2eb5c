//! Constructive sparse approximation: represent any l1-ball combination of
//! the scaled columns to within `b^2/K` squared error by a K-term integer
//! combination, by sampling from the coefficient distribution.

use ndarray::Array1;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{HypothesisClassSpec, ScaledData};
use crate::error::{Error, Result};

const MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone)]
pub struct MaureyResult {
    /// Integer weights with `sum |k_j| <= K`.
    pub k: Vec<i64>,
    /// The discretized vector `sum_j (k_j / K) h~_j`.
    pub y_k: Array1<f64>,
    /// `|| y - y_k ||_2^2`.
    pub sq_error: f64,
    pub attempts: usize,
}

/// Draw `K` indices from the distribution `(|b~_1|, ..., |b~_p|, slack)` and
/// absorb signs into the counts; retry until the sampled combination lands
/// within the guaranteed radius (the expectation argument makes success
/// certain within a few attempts).
pub fn maurey_approximation(
    beta_tilde: &Array1<f64>,
    scaled: &ScaledData,
    k_level: u64,
    seed: u64,
) -> Result<MaureyResult> {
    let p = scaled.p();
    if beta_tilde.len() != p {
        return Err(Error::DimensionMismatch("beta length != dimension".into()));
    }
    if k_level == 0 {
        return Err(Error::InvalidInput("K must be >= 1".into()));
    }
    let l1: f64 = beta_tilde.iter().map(|b| b.abs()).sum();
    if l1 > 1.0 + 1e-9 {
        return Err(Error::InvalidInput(format!("l1 norm of scaled beta is {l1}, above 1")));
    }
    let y = scaled.h_tilde.dot(beta_tilde);
    let radius_sq = scaled.maurey_radius * scaled.maurey_radius / k_level as f64;

    // Cumulative distribution over p + 1 cells; the final slack cell maps to
    // the zero vector and absorbs 1 - sum |b~_j|.
    let mut cumulative = Vec::with_capacity(p);
    let mut acc = 0.0;
    for b in beta_tilde.iter() {
        acc += b.abs();
        cumulative.push(acc);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=MAX_ATTEMPTS {
        let mut counts = vec![0i64; p];
        for _ in 0..k_level {
            let u: f64 = rng.gen();
            // First cell whose cumulative mass covers u; the slack cell
            // (u beyond every boundary) contributes nothing.
            if let Some(j) = cumulative.iter().position(|&c| u < c) {
                counts[j] += beta_tilde[j].signum() as i64;
            }
        }
        let kappa = Array1::from_shape_fn(p, |j| counts[j] as f64 / k_level as f64);
        let y_k = scaled.h_tilde.dot(&kappa);
        let diff = &y - &y_k;
        let sq_error = diff.dot(&diff);
        if sq_error <= radius_sq {
            return Ok(MaureyResult { k: counts, y_k, sq_error, attempts: attempt });
        }
    }
    Err(Error::Internal(format!(
        "no draw within the guaranteed radius after {MAX_ATTEMPTS} attempts"
    )))
}

/// The discretization level above which the sampled integer combination is
/// guaranteed to satisfy the scaled constraints. None when the spectrum
/// floor is vacuous; zero when there are no constraints.
pub fn constraint_preservation_threshold(scaled: &ScaledData, spec: &HypothesisClassSpec) -> Option<f64> {
    if spec.num_constraints() == 0 {
        return Some(0.0);
    }
    let margin = scaled.constraint_margin()?;
    if scaled.is_vacuous() {
        return None;
    }
    let b = scaled.maurey_radius;
    Some(b * b / (margin * margin * scaled.lambda_min))
}

/// Do the scaled constraint rows hold at the discretized point `k / K`?
/// Vacuously true without constraints.
pub fn discretized_constraints_hold(
    k: &[i64],
    k_level: u64,
    scaled: &ScaledData,
    spec: &HypothesisClassSpec,
) -> Result<bool> {
    if k.len() != scaled.p() {
        return Err(Error::DimensionMismatch("integer vector length != dimension".into()));
    }
    if k_level == 0 {
        return Err(Error::InvalidInput("K must be >= 1".into()));
    }
    for nu in 0..spec.num_constraints() {
        let value: f64 = scaled
            .c_tilde
            .row(nu)
            .iter()
            .zip(k)
            .map(|(c, &kj)| c * kj as f64 / k_level as f64)
            .sum();
        if value > 1.0 + 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}
