//! Central numeric tolerances and size limits.
//!
//! Every threshold used by solvers, validators and tests lives here so the
//! documented behaviour and the tested behaviour cannot drift apart.

/// Maximum allowed asymmetry `|m_ij - m_ji|` before a matrix is rejected as
/// not symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Jacobi eigensolver stops when the off-diagonal Frobenius norm drops below
/// `JACOBI_OFF_TOL * max(1, ||M||_F)`.
pub const JACOBI_OFF_TOL: f64 = 1e-12;

/// Hard cap on Jacobi sweeps; convergence is quadratic so this is generous.
pub const JACOBI_MAX_SWEEPS: usize = 128;

/// Eigenvalues with absolute value below this are clamped to exactly zero.
pub const EIG_CLAMP_TOL: f64 = 1e-10;

/// Pivots below this are treated as zero by the dense linear solvers.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Feasibility / optimality tolerance of the simplex LP solver.
pub const LP_TOL: f64 = 1e-8;

/// Allowed slack when re-checking a returned policy against its constraints.
pub const POLICY_FEAS_TOL: f64 = 1e-8;

/// Agreement required between the scheduling LP and the longest-path solver.
pub const SOLVER_AGREEMENT_TOL: f64 = 1e-8;

/// A scaled Gram matrix with smallest eigenvalue below this triggers the
/// vacuous-bound path (the constrained count is skipped).
pub const VACUOUS_LAMBDA_TOL: f64 = 1e-10;

/// Refuse to enumerate source-sink paths beyond this many.
pub const PATH_ENUM_CAP: u64 = 1_000_000;

/// Refuse lattice counts whose predicted size exceeds this.
pub const LATTICE_COUNT_CAP: u64 = 1_000_000_000;

/// Inside the entropy integral, the constrained count is only enumerated when
/// the predicted unconstrained size stays below this cheaper cap.
pub const DUDLEY_ENUM_CAP: u64 = 1_000_000;

/// Lower end of the entropy-integral grid, as a fraction of `X_b * B_b`.
/// The `(0, alpha_min)` sliver is covered by an analytic bound.
pub const DUDLEY_ALPHA_MIN_RATIO: f64 = 1e-6;

/// Default number of log-spaced subintervals in the entropy integral.
pub const DUDLEY_DEFAULT_GRID: usize = 512;

/// Default points per axis for the saddle-point grids on 2-D demos.
pub const SADDLE_GRID_DEFAULT: usize = 201;

/// Non-finite / row-norm validation slack when checking `||x_i||_r <= X_b`.
pub const ROW_NORM_SLACK: f64 = 1e-9;
