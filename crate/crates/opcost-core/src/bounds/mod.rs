//! Covering-number generalization bounds for linearly constrained linear
//! classes: data/constraint scaling, threshold computation, exact lattice
//! counts, the entropy integral, empirical complexity estimates, and the
//! constructive sparse-approximation checks behind them.

pub mod covering;
pub mod dudley;
pub mod lattice;
pub mod maurey;
pub mod rademacher;
pub mod rationalize;

pub use covering::{compute_k, compute_k0, covering_number_bound, covering_record, EpsilonRecord, KValue};
pub use dudley::{dudley_rademacher_bound, generalization_bound};
pub use lattice::{
    count_constrained_lattice, count_l1_lattice, enumerate_l1_lattice, IntegerConstraint,
    LatticeCountQuery,
};
pub use maurey::{constraint_preservation_threshold, maurey_approximation, discretized_constraints_hold, MaureyResult};
pub use rademacher::{empirical_rademacher_exact, empirical_rademacher_mc, RademacherEstimate};
pub use rationalize::rationalize_constraints;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::model::smallest_eigenvalue;
use crate::tol;

/// One linear cap on the coefficients: `c^T beta + delta <= 1`, margin
/// strictly positive.
#[derive(Debug, Clone)]
pub struct ClassConstraint {
    pub c: Array1<f64>,
    pub delta: f64,
}

/// The constrained hypothesis class: coefficients in an l_q ball of radius
/// `b_b`, data rows bounded in l_r norm by `x_b` (with `1/r + 1/q = 1`), and
/// any number of linear caps.
#[derive(Debug, Clone)]
pub struct HypothesisClassSpec {
    pub p: usize,
    /// Data-norm index in [2, inf]; `f64::INFINITY` selects the sup norm.
    pub r: f64,
    pub x_b: f64,
    pub b_b: f64,
    pub constraints: Vec<ClassConstraint>,
}

impl HypothesisClassSpec {
    pub fn new(
        p: usize,
        r: f64,
        x_b: f64,
        b_b: f64,
        constraints: Vec<ClassConstraint>,
    ) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidInput("dimension must be >= 1".into()));
        }
        if !(r >= 2.0) {
            return Err(Error::InvalidInput("r must be in [2, inf]".into()));
        }
        if !(x_b > 0.0 && x_b.is_finite()) || !(b_b > 0.0 && b_b.is_finite()) {
            return Err(Error::InvalidInput("norm bounds must be positive and finite".into()));
        }
        for (i, c) in constraints.iter().enumerate() {
            if c.c.len() != p {
                return Err(Error::DimensionMismatch(format!(
                    "constraint {i} has {} coefficients for dimension {p}",
                    c.c.len()
                )));
            }
            if !(c.delta > 0.0) {
                return Err(Error::InvalidInput(format!("constraint {i} margin must be > 0")));
            }
        }
        Ok(Self { p, r, x_b, b_b, constraints })
    }

    /// Conjugate coefficient-norm index: `1/r + 1/q = 1`, with `r = inf`
    /// giving `q = 1`.
    pub fn q(&self) -> f64 {
        if self.r.is_infinite() {
            1.0
        } else {
            self.r / (self.r - 1.0)
        }
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Membership of `beta` in the class.
    pub fn contains(&self, beta: &Array1<f64>) -> bool {
        let q = self.q();
        let norm = beta.iter().map(|b| b.abs().powf(q)).sum::<f64>().powf(1.0 / q);
        if norm > self.b_b * (1.0 + tol::ROW_NORM_SLACK) {
            return false;
        }
        self.constraints
            .iter()
            .all(|c| c.c.dot(beta) + c.delta <= 1.0 + tol::ROW_NORM_SLACK)
    }
}

fn norm_r(v: ndarray::ArrayView1<f64>, r: f64) -> f64 {
    if r.is_infinite() {
        v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    } else {
        v.iter().map(|x| x.abs().powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// Column-rescaled data and constraints, with the Gram spectrum floor.
///
/// Column `j` is scaled so its l_r norm equals `n^{1/r} x_b b_b` exactly;
/// constraint coefficients scale by the same per-column factor, which leaves
/// constraint values invariant under the paired coefficient scaling.
#[derive(Debug, Clone)]
pub struct ScaledData {
    pub h_tilde: Array2<f64>,
    /// V x p scaled constraint matrix.
    pub c_tilde: Array2<f64>,
    /// Margins copied from the spec, aligned with `c_tilde` rows.
    pub deltas: Vec<f64>,
    /// Smallest eigenvalue of the scaled Gram matrix.
    pub lambda_min: f64,
    /// Per-column multipliers applied to the data.
    pub scale_factors: Array1<f64>,
    pub n: usize,
    pub xb_bb: f64,
    /// Target l_r norm of every scaled column.
    pub col_norm_target: f64,
    /// `sqrt(n) * x_b * b_b`: the column l2 cap used by the sparse
    /// approximation.
    pub maurey_radius: f64,
}

impl ScaledData {
    /// The paired coefficient scaling (inverse of the column scaling).
    pub fn scale_beta(&self, beta: &Array1<f64>) -> Result<Array1<f64>> {
        if beta.len() != self.scale_factors.len() {
            return Err(Error::DimensionMismatch("beta length != dimension".into()));
        }
        Ok(Array1::from_shape_fn(beta.len(), |j| beta[j] / self.scale_factors[j]))
    }

    pub fn p(&self) -> usize {
        self.h_tilde.ncols()
    }

    /// Whether the spectrum floor is too small for the constrained count.
    pub fn is_vacuous(&self) -> bool {
        self.lambda_min < tol::VACUOUS_LAMBDA_TOL
    }

    /// `min_nu delta_nu / sum_j |c_tilde[nu][j]|`; None without constraints.
    /// Rows with all-zero coefficients impose nothing and are skipped.
    pub fn constraint_margin(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (nu, delta) in self.deltas.iter().enumerate() {
            let denom: f64 = self.c_tilde.row(nu).iter().map(|c| c.abs()).sum();
            if denom == 0.0 {
                continue;
            }
            let m = delta / denom;
            best = Some(match best {
                None => m,
                Some(b) => b.min(m),
            });
        }
        best
    }
}

/// Rescale data columns and constraint rows for the counting machinery.
pub fn scale_data(x: &Array2<f64>, spec: &HypothesisClassSpec) -> Result<ScaledData> {
    let (n, p) = x.dim();
    if p != spec.p {
        return Err(Error::DimensionMismatch(format!(
            "data has {p} columns, spec says {}",
            spec.p
        )));
    }
    if n == 0 {
        return Err(Error::InvalidInput("need at least one row".into()));
    }
    for (i, row) in x.rows().into_iter().enumerate() {
        let rn = norm_r(row, spec.r);
        if rn > spec.x_b * (1.0 + tol::ROW_NORM_SLACK) {
            return Err(Error::InvalidInput(format!(
                "row {i} has l_r norm {rn}, above the bound {}",
                spec.x_b
            )));
        }
    }
    let n_pow = if spec.r.is_infinite() { 1.0 } else { (n as f64).powf(1.0 / spec.r) };
    let col_norm_target = n_pow * spec.x_b * spec.b_b;
    let mut scale_factors = Array1::zeros(p);
    for j in 0..p {
        let hn = norm_r(x.column(j), spec.r);
        if hn == 0.0 {
            return Err(Error::DegenerateInput(format!("column {j} is identically zero")));
        }
        scale_factors[j] = col_norm_target / hn;
    }
    let mut h_tilde = x.clone();
    for j in 0..p {
        h_tilde.column_mut(j).mapv_inplace(|v| v * scale_factors[j]);
    }
    let v = spec.num_constraints();
    let mut c_tilde = Array2::zeros((v, p));
    for (nu, c) in spec.constraints.iter().enumerate() {
        for j in 0..p {
            c_tilde[(nu, j)] = c.c[j] * scale_factors[j];
        }
    }
    let gram = h_tilde.t().dot(&h_tilde);
    let lambda_min = smallest_eigenvalue(&gram)?;
    Ok(ScaledData {
        h_tilde,
        c_tilde,
        deltas: spec.constraints.iter().map(|c| c.delta).collect(),
        lambda_min,
        scale_factors,
        n,
        xb_bb: spec.x_b * spec.b_b,
        col_norm_target,
        maurey_radius: (n as f64).sqrt() * spec.x_b * spec.b_b,
    })
}

/// Everything the `bound` command reports: per-epsilon counting records plus
/// the entropy integral and the closing deviation term.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub records: Vec<EpsilonRecord>,
    pub dudley_value: f64,
    pub lipschitz: f64,
    pub confidence_delta: f64,
    pub n: usize,
    pub lambda_min: f64,
    pub vacuous: bool,
    pub deviation_term: f64,
    /// `lipschitz * dudley_value + deviation_term`: the additive excess of
    /// the final bound over the empirical risk.
    pub final_bound_excess: f64,
}

/// Run the counting pipeline on an epsilon grid and assemble the full report.
pub fn bound_report(
    spec: &HypothesisClassSpec,
    x: &Array2<f64>,
    epsilon_grid: &[f64],
    lipschitz: f64,
    confidence_delta: f64,
    dudley_grid: usize,
) -> Result<BoundReport> {
    if epsilon_grid.is_empty() {
        return Err(Error::InvalidInput("empty epsilon grid".into()));
    }
    if epsilon_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput("epsilon grid must be sorted ascending".into()));
    }
    if !(lipschitz > 0.0) {
        return Err(Error::InvalidInput("Lipschitz constant must be > 0".into()));
    }
    if !(confidence_delta > 0.0 && confidence_delta <= 1.0) {
        return Err(Error::InvalidInput("confidence delta must be in (0, 1]".into()));
    }
    let scaled = scale_data(x, spec)?;
    let n = scaled.n;
    let mut records = Vec::with_capacity(epsilon_grid.len());
    for &eps in epsilon_grid {
        records.push(covering_record(eps, n, spec, &scaled)?);
    }
    let dudley_value = dudley::dudley_bound_scaled(spec, &scaled, dudley_grid)?;
    let deviation_term =
        (3.0 / std::f64::consts::SQRT_2) * ((1.0 / confidence_delta).ln() / n as f64).sqrt();
    Ok(BoundReport {
        records,
        dudley_value,
        lipschitz,
        confidence_delta,
        n,
        lambda_min: scaled.lambda_min,
        vacuous: scaled.is_vacuous(),
        deviation_term,
        final_bound_excess: lipschitz * dudley_value + deviation_term,
    })
}
