//! Linear prediction, squared-error loss, the ridge baseline, goodness-of-fit
//! statistics and the small symmetric eigensolver shared by the bound engine.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::tol;

/// Labeled training data: rows of `x` are instances, `y` holds their labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Array1<f64>, feature_names: Vec<String>) -> Result<Self> {
        let (n, p) = x.dim();
        if n == 0 || p == 0 {
            return Err(Error::InvalidInput(format!(
                "dataset must have n >= 1 and p >= 1, got {n}x{p}"
            )));
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} rows",
                y.len(),
                n
            )));
        }
        if feature_names.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                p
            )));
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite entry in dataset".into()));
        }
        Ok(Self { x, y, feature_names })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}

/// Future instances on which policies are computed. No labels.
#[derive(Debug, Clone)]
pub struct UnlabeledSet {
    pub x: Array2<f64>,
}

impl UnlabeledSet {
    pub fn new(x: Array2<f64>) -> Result<Self> {
        let (m, p) = x.dim();
        if m == 0 || p == 0 {
            return Err(Error::InvalidInput(format!(
                "unlabeled set must have m >= 1 and p >= 1, got {m}x{p}"
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite entry in unlabeled set".into()));
        }
        Ok(Self { x })
    }

    pub fn m(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Predictions of `model` on every row.
    pub fn predictions(&self, model: &LinearModel) -> Result<Array1<f64>> {
        if model.beta.len() != self.p() {
            return Err(Error::DimensionMismatch(format!(
                "model has {} coefficients, unlabeled rows have {}",
                model.beta.len(),
                self.p()
            )));
        }
        Ok(self.x.dot(&model.beta))
    }
}

/// A linear predictor `x -> beta^T x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub beta: Array1<f64>,
}

impl LinearModel {
    pub fn new(beta: Array1<f64>) -> Result<Self> {
        if beta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self { beta })
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }
}

/// Inner product `beta^T x`.
pub fn predict(model: &LinearModel, x: &Array1<f64>) -> Result<f64> {
    if model.beta.len() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "beta has {} entries, x has {}",
            model.beta.len(),
            x.len()
        )));
    }
    Ok(model.beta.dot(x))
}

/// Sum of squared residuals over the whole dataset.
pub fn least_squares_loss(model: &LinearModel, data: &Dataset) -> Result<f64> {
    if model.beta.len() != data.p() {
        return Err(Error::DimensionMismatch(format!(
            "beta has {} entries, data has {} features",
            model.beta.len(),
            data.p()
        )));
    }
    let fitted = data.x.dot(&model.beta);
    Ok(fitted
        .iter()
        .zip(data.y.iter())
        .map(|(f, y)| (y - f) * (y - f))
        .sum())
}

/// `1 - SS_res / SS_tot`. Errors out on a constant target rather than
/// silently returning a NaN.
pub fn r_squared(predictions: &Array1<f64>, y: &Array1<f64>) -> Result<f64> {
    if predictions.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} labels",
            predictions.len(),
            y.len()
        )));
    }
    if y.len() < 2 {
        return Err(Error::InvalidInput("r-squared needs at least 2 points".into()));
    }
    let mean = y.sum() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::DegenerateInput(
            "constant target: r-squared denominator is zero".into(),
        ));
    }
    let ss_res: f64 = predictions
        .iter()
        .zip(y.iter())
        .map(|(f, v)| (v - f) * (v - f))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Minimizer of `sum (y_i - beta^T x_i)^2 + c2 * ||beta||_2^2` via the normal
/// equations `(X^T X + c2 I) beta = X^T y`.
pub fn ridge_closed_form(data: &Dataset, c2: f64) -> Result<LinearModel> {
    if c2 < 0.0 || !c2.is_finite() {
        return Err(Error::InvalidInput(format!("c2 must be finite and >= 0, got {c2}")));
    }
    let p = data.p();
    let mut gram = data.x.t().dot(&data.x);
    for j in 0..p {
        gram[(j, j)] += c2;
    }
    let rhs = data.x.t().dot(&data.y);
    let beta = solve_dense(&gram, &rhs)?;
    LinearModel::new(beta)
}

/// Gaussian elimination with partial pivoting on a small dense system.
pub(crate) fn solve_dense(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch("solve_dense wants square A and matching b".into()));
    }
    let mut m = a.clone();
    let mut rhs = b.clone();
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = m[(col, col)].abs();
        for r in col + 1..n {
            if m[(r, col)].abs() > pivot_val {
                pivot_val = m[(r, col)].abs();
                pivot_row = r;
            }
        }
        if pivot_val <= tol::SINGULAR_TOL * scale {
            return Err(Error::Singular(format!("pivot {pivot_val:.3e} at column {col}")));
        }
        if pivot_row != col {
            for c in 0..n {
                m.swap((col, c), (pivot_row, c));
            }
            rhs.swap(col, pivot_row);
        }
        for r in col + 1..n {
            let factor = m[(r, col)] / m[(col, col)];
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                m[(r, c)] -= factor * m[(col, c)];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    let mut x = Array1::zeros(n);
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for c in row + 1..n {
            acc -= m[(row, c)] * x[c];
        }
        x[row] = acc / m[(row, row)];
    }
    Ok(x)
}

/// Smallest eigenvalue of a symmetric positive semidefinite matrix, by cyclic
/// Jacobi rotations. Tiny negatives from round-off are clamped to zero.
pub fn smallest_eigenvalue(m: &Array2<f64>) -> Result<f64> {
    let evs = symmetric_eigenvalues(m)?;
    let min = evs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(if min.abs() < tol::EIG_CLAMP_TOL { 0.0 } else { min })
}

/// All eigenvalues of a symmetric matrix (unordered), by cyclic Jacobi.
pub fn symmetric_eigenvalues(m: &Array2<f64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(format!("matrix is {}x{}", n, m.ncols())));
    }
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    for i in 0..n {
        for j in i + 1..n {
            if (m[(i, j)] - m[(j, i)]).abs() > tol::SYMMETRY_TOL * scale {
                return Err(Error::InvalidInput(format!(
                    "matrix not symmetric at ({i},{j}): {} vs {}",
                    m[(i, j)],
                    m[(j, i)]
                )));
            }
        }
    }
    let mut a = m.clone();
    // Symmetrize exactly so rotations stay consistent under round-off.
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
    let frob = a.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    let threshold = tol::JACOBI_OFF_TOL * frob;
    for _sweep in 0..tol::JACOBI_MAX_SWEEPS {
        let off: f64 = {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        s += a[(i, j)] * a[(i, j)];
                    }
                }
            }
            s.sqrt()
        };
        if off < threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
            }
        }
    }
    Ok((0..n).map(|i| a[(i, i)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{arr1, arr2, Array};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn names(p: usize) -> Vec<String> {
        (1..=p).map(|j| format!("x{j}")).collect()
    }

    #[test]
    fn predict_inner_product() {
        let m = LinearModel::new(arr1(&[1.0, 2.0])).unwrap();
        assert_eq!(predict(&m, &arr1(&[3.0, 4.0])).unwrap(), 11.0);
    }

    #[test]
    fn predict_zero_model() {
        let m = LinearModel::new(arr1(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(predict(&m, &arr1(&[5.0, -2.0, 9.0])).unwrap(), 0.0);
    }

    #[test]
    fn predict_matches_summation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let beta: Vec<f64> = (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let m = LinearModel::new(Array1::from(beta.clone())).unwrap();
            let got = predict(&m, &Array1::from(x.clone())).unwrap();
            // Independent elementwise accumulation.
            let mut want = 0.0;
            for j in 0..6 {
                want += beta[j] * x[j];
            }
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn predict_dimension_mismatch() {
        let m = LinearModel::new(arr1(&[1.0])).unwrap();
        assert!(matches!(
            predict(&m, &arr1(&[1.0, 2.0])),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn loss_zero_on_exact_fit() {
        let x = arr2(&[[1.0, 0.0], [0.0, 1.0], [2.0, 3.0]]);
        let beta = arr1(&[1.5, -0.5]);
        let y = x.dot(&beta);
        let data = Dataset::new(x, y, names(2)).unwrap();
        let m = LinearModel::new(beta).unwrap();
        assert_abs_diff_eq!(least_squares_loss(&m, &data).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn loss_scalar_case() {
        let data = Dataset::new(arr2(&[[1.0]]), arr1(&[3.0]), names(1)).unwrap();
        let m = LinearModel::new(arr1(&[1.0])).unwrap();
        assert_eq!(least_squares_loss(&m, &data).unwrap(), 4.0);
    }

    #[test]
    fn loss_matches_norm_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let n = rng.gen_range(2..20);
            let p = rng.gen_range(1..6);
            let x = Array::from_shape_fn((n, p), |_| rng.gen_range(-2.0..2.0));
            let y = Array::from_shape_fn(n, |_| rng.gen_range(-2.0..2.0));
            let beta = Array::from_shape_fn(p, |_| rng.gen_range(-2.0..2.0));
            let data = Dataset::new(x.clone(), y.clone(), names(p)).unwrap();
            let m = LinearModel::new(beta.clone()).unwrap();
            let resid = &y - &x.dot(&beta);
            let want: f64 = resid.iter().map(|r| r * r).sum();
            assert_abs_diff_eq!(least_squares_loss(&m, &data).unwrap(), want, epsilon = 1e-9);
        }
    }

    #[test]
    fn r_squared_perfect_fit() {
        let y = arr1(&[1.0, 2.0, 5.0]);
        assert_eq!(r_squared(&y.clone(), &y).unwrap(), 1.0);
    }

    #[test]
    fn r_squared_mean_prediction() {
        let y = arr1(&[1.0, 2.0, 3.0]);
        let yhat = arr1(&[2.0, 2.0, 2.0]);
        assert_abs_diff_eq!(r_squared(&yhat, &y).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn r_squared_half() {
        let y = arr1(&[1.0, 2.0, 3.0]);
        let yhat = arr1(&[1.0, 2.0, 4.0]);
        assert_abs_diff_eq!(r_squared(&yhat, &y).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn r_squared_constant_target_errors() {
        let y = arr1(&[2.0, 2.0, 2.0]);
        let yhat = arr1(&[1.0, 2.0, 3.0]);
        assert!(matches!(r_squared(&yhat, &y), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn r_squared_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 12;
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..4.0)).collect();
        let yhat: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..4.0)).collect();
        let base = r_squared(&Array1::from(yhat.clone()), &Array1::from(y.clone())).unwrap();
        let mut idx: Vec<usize> = (0..n).collect();
        for _ in 0..20 {
            idx.shuffle(&mut rng);
            let yp: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
            let yhp: Vec<f64> = idx.iter().map(|&i| yhat[i]).collect();
            let perm = r_squared(&Array1::from(yhp), &Array1::from(yp)).unwrap();
            assert_abs_diff_eq!(base, perm, epsilon = 1e-12);
        }
    }

    #[test]
    fn ridge_ols_on_square_invertible() {
        let x = arr2(&[[2.0, 1.0], [1.0, 3.0]]);
        let y = arr1(&[5.0, 10.0]);
        let data = Dataset::new(x.clone(), y.clone(), names(2)).unwrap();
        let m = ridge_closed_form(&data, 0.0).unwrap();
        // X beta = y exactly for invertible square X.
        let fitted = x.dot(&m.beta);
        assert_abs_diff_eq!(fitted[0], y[0], epsilon = 1e-9);
        assert_abs_diff_eq!(fitted[1], y[1], epsilon = 1e-9);
    }

    #[test]
    fn ridge_identity_design_shrinks() {
        let x = arr2(&[[1.0, 0.0], [0.0, 1.0]]);
        let y = arr1(&[4.0, -6.0]);
        let data = Dataset::new(x, y, names(2)).unwrap();
        let c = 3.0;
        let m = ridge_closed_form(&data, c).unwrap();
        assert_abs_diff_eq!(m.beta[0], 4.0 / (1.0 + c), epsilon = 1e-12);
        assert_abs_diff_eq!(m.beta[1], -6.0 / (1.0 + c), epsilon = 1e-12);
    }

    #[test]
    fn ridge_gradient_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..20 {
            let n = rng.gen_range(8..40);
            let p = rng.gen_range(1..6);
            let x = Array::from_shape_fn((n, p), |_| rng.gen_range(-2.0..2.0));
            let y = Array::from_shape_fn(n, |_| rng.gen_range(-2.0..2.0));
            let c2 = rng.gen_range(0.01..2.0);
            let data = Dataset::new(x.clone(), y.clone(), names(p)).unwrap();
            let m = ridge_closed_form(&data, c2).unwrap();
            // Analytic gradient 2 X^T (X beta - y) + 2 c2 beta.
            let grad = x.t().dot(&(&x.dot(&m.beta) - &y)) * 2.0 + &m.beta * (2.0 * c2);
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            assert!(norm <= 1e-8, "gradient norm {norm}");
        }
    }

    #[test]
    fn ridge_singular_at_zero() {
        // Rank-deficient design: second column is twice the first.
        let x = arr2(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]);
        let y = arr1(&[1.0, 2.0, 3.0]);
        let data = Dataset::new(x, y, names(2)).unwrap();
        assert!(matches!(ridge_closed_form(&data, 0.0), Err(Error::Singular(_))));
        assert!(ridge_closed_form(&data, 1e-3).is_ok());
    }

    #[test]
    fn ridge_optimality_against_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let x = Array::from_shape_fn((30, 4), |_| rng.gen_range(-2.0..2.0));
        let y = Array::from_shape_fn(30, |_| rng.gen_range(-2.0..2.0));
        let c2 = 0.5;
        let data = Dataset::new(x, y, names(4)).unwrap();
        let m = ridge_closed_form(&data, c2).unwrap();
        let objective = |beta: &Array1<f64>| {
            let model = LinearModel::new(beta.clone()).unwrap();
            least_squares_loss(&model, &data).unwrap() + c2 * beta.dot(beta)
        };
        let best = objective(&m.beta);
        for _ in 0..1000 {
            let noise = Array::from_shape_fn(4, |_| rng.gen_range(-0.5..0.5));
            let other = &m.beta + &noise;
            assert!(objective(&other) + 1e-10 >= best);
        }
    }

    #[test]
    fn eigen_identity() {
        for p in 1..6 {
            let m = Array2::eye(p);
            assert_abs_diff_eq!(smallest_eigenvalue(&m).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn eigen_diagonal() {
        let m = arr2(&[[1.0, 0.0], [0.0, 5.0]]);
        assert_abs_diff_eq!(smallest_eigenvalue(&m).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eigen_rejects_asymmetric() {
        let m = arr2(&[[1.0, 0.5], [0.2, 1.0]]);
        assert!(matches!(smallest_eigenvalue(&m), Err(Error::InvalidInput(_))));
    }

    /// Bisection on the characteristic polynomial, used as an independent
    /// oracle for the Jacobi result.
    fn char_poly_min_eig(m: &Array2<f64>) -> f64 {
        let n = m.nrows();
        let det = |lambda: f64| {
            // Gaussian elimination without pivoting tolerance shortcuts.
            let mut a = m.clone();
            for i in 0..n {
                a[(i, i)] -= lambda;
            }
            let mut sign = 1.0;
            let mut logdet = 0.0f64;
            let mut singular = false;
            for col in 0..n {
                let mut pr = col;
                for r in col + 1..n {
                    if a[(r, col)].abs() > a[(pr, col)].abs() {
                        pr = r;
                    }
                }
                if a[(pr, col)].abs() < 1e-300 {
                    singular = true;
                    break;
                }
                if pr != col {
                    for c in 0..n {
                        a.swap((col, c), (pr, c));
                    }
                    sign = -sign;
                }
                if a[(col, col)] < 0.0 {
                    sign = -sign;
                }
                logdet += a[(col, col)].abs().ln();
                for r in col + 1..n {
                    let f = a[(r, col)] / a[(col, col)];
                    for c in col..n {
                        a[(r, c)] -= f * a[(col, c)];
                    }
                }
            }
            if singular {
                0.0
            } else {
                sign * logdet.exp()
            }
        };
        // The characteristic polynomial det(M - lambda I) has degree n with
        // leading coefficient (-1)^n; below the smallest eigenvalue its sign
        // is that of det(M) at lambda -> -inf, i.e. +. Bisect on sign change.
        let hi_bound = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())) * n as f64 + 1.0;
        let lo = -hi_bound;
        let hi = hi_bound;
        // Find smallest root: scan for first sign flip from det(lo).
        let steps = 20000;
        let mut prev_lambda = lo;
        let mut prev_val = det(lo);
        let mut bracket = None;
        for s in 1..=steps {
            let lambda = lo + (hi - lo) * s as f64 / steps as f64;
            let val = det(lambda);
            if prev_val == 0.0 {
                return prev_lambda;
            }
            if val == 0.0 || (val < 0.0) != (prev_val < 0.0) {
                bracket = Some((prev_lambda, lambda));
                break;
            }
            prev_lambda = lambda;
            prev_val = val;
        }
        let (mut a_, mut b_) = bracket.expect("no sign change found");
        for _ in 0..200 {
            let mid = 0.5 * (a_ + b_);
            let v = det(mid);
            if v == 0.0 {
                return mid;
            }
            if (v < 0.0) != (det(a_) < 0.0) {
                b_ = mid;
            } else {
                a_ = mid;
            }
        }
        0.5 * (a_ + b_)
    }

    #[test]
    fn eigen_matches_char_poly_bisection() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..15 {
            let p = rng.gen_range(2..6);
            let a = Array::from_shape_fn((p + 2, p), |_| rng.gen_range(-1.5..1.5));
            let m = a.t().dot(&a);
            let got = smallest_eigenvalue(&m).unwrap();
            let want = char_poly_min_eig(&m);
            assert_abs_diff_eq!(got, want.max(0.0), epsilon = 1e-7);
        }
    }

    #[test]
    fn eigen_shift_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let p = rng.gen_range(2..6);
            let a = Array::from_shape_fn((p + 1, p), |_| rng.gen_range(-1.0..1.0));
            let m = a.t().dot(&a);
            let base = smallest_eigenvalue(&m).unwrap();
            for &t in &[0.1, 1.0, 7.5] {
                let mut shifted = m.clone();
                for i in 0..p {
                    shifted[(i, i)] += t;
                }
                let got = smallest_eigenvalue(&shifted).unwrap();
                assert_abs_diff_eq!(got, base + t, epsilon = 1e-8);
            }
        }
    }
}
