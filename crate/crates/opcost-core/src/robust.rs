//! Loss-induced uncertainty sets, exhaustive saddle-point computation on
//! grids, and the constructive equivalence check between the pessimistic
//! coupled fit and robust optimization on convex bilinear instances.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::model::{Dataset, LinearModel};
use crate::optimizer::{fit_simultaneous, Bias, NelderMeadConfig, SimultaneousConfig};
use crate::problems::{BilinearGame, OpCostProblem};

/// Loss functions whose level sets define uncertainty sets. The margin-based
/// kinds expect labels in {-1, +1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    LeastSquares,
    Hinge,
    Logistic,
    Exponential,
    Ramp,
    ZeroOne,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::LeastSquares => "least-squares",
            LossKind::Hinge => "hinge",
            LossKind::Logistic => "logistic",
            LossKind::Exponential => "exponential",
            LossKind::Ramp => "ramp",
            LossKind::ZeroOne => "zero-one",
        }
    }

    fn needs_sign_labels(self) -> bool {
        !matches!(self, LossKind::LeastSquares)
    }
}

/// Total empirical loss of the linear predictor `beta` on `data`.
pub fn empirical_loss(kind: LossKind, data: &Dataset, beta: &Array1<f64>) -> Result<f64> {
    if beta.len() != data.p() {
        return Err(Error::DimensionMismatch("beta length != feature count".into()));
    }
    if kind.needs_sign_labels() && data.y.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(Error::InvalidInput(format!(
            "{} loss expects labels in {{-1, +1}}",
            kind.name()
        )));
    }
    let fitted = data.x.dot(beta);
    let total = fitted
        .iter()
        .zip(data.y.iter())
        .map(|(&f, &y)| match kind {
            LossKind::LeastSquares => (y - f) * (y - f),
            LossKind::Hinge => (1.0 - y * f).max(0.0),
            LossKind::Logistic => (1.0 + (-y * f).exp()).ln(),
            LossKind::Exponential => (-y * f).exp(),
            LossKind::Ramp => (1.0 - y * f).max(0.0).min(1.0),
            LossKind::ZeroOne => {
                let pred = if f >= 0.0 { 1.0 } else { -1.0 };
                if pred == y {
                    0.0
                } else {
                    1.0
                }
            }
        })
        .sum();
    Ok(total)
}

/// The set of models that fit the data to within a slack of the reference
/// minimizer, intersected with a norm ball.
#[derive(Debug, Clone)]
pub struct UncertaintySet {
    pub loss_kind: LossKind,
    pub data: Dataset,
    /// Loss budget: members satisfy `loss(beta) <= c1_star`.
    pub c1_star: f64,
    /// Ball budget: members satisfy `||beta||_q^q <= c2_star`.
    pub c2_star: f64,
    pub q: f64,
    pub reference: LinearModel,
    pub epsilon_slack: f64,
}

impl UncertaintySet {
    /// Radius of the bounding box enclosing the ball.
    pub fn ball_radius(&self) -> f64 {
        self.c2_star.powf(1.0 / self.q)
    }
}

/// `c1_star` is the reference model's loss plus the slack.
pub fn build_fgood(
    data: &Dataset,
    f_star: &LinearModel,
    epsilon: f64,
    c2_star: f64,
    loss_kind: LossKind,
    q: f64,
) -> Result<UncertaintySet> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidInput("epsilon must be >= 0".into()));
    }
    if !(c2_star > 0.0) {
        return Err(Error::InvalidInput("c2_star must be > 0".into()));
    }
    if !(q >= 1.0) {
        return Err(Error::InvalidInput("q must be >= 1".into()));
    }
    let base = empirical_loss(loss_kind, data, &f_star.beta)?;
    Ok(UncertaintySet {
        loss_kind,
        data: data.clone(),
        c1_star: base + epsilon,
        c2_star,
        q,
        reference: f_star.clone(),
        epsilon_slack: epsilon,
    })
}

fn norm_q_pow(beta: &Array1<f64>, q: f64) -> f64 {
    beta.iter().map(|b| b.abs().powf(q)).sum()
}

/// Both the loss-kind inequality and the ball inequality.
pub fn membership_fgood(beta: &Array1<f64>, set: &UncertaintySet) -> Result<bool> {
    let loss = empirical_loss(set.loss_kind, &set.data, beta)?;
    Ok(loss <= set.c1_star && norm_q_pow(beta, set.q) <= set.c2_star)
}

/// The coefficient side of a saddle-point computation: either a plain box or
/// an uncertainty set sampled through its bounding box.
#[derive(Debug, Clone)]
pub enum BetaSet {
    Box { bounds: Vec<(f64, f64)> },
    Uncertainty(UncertaintySet),
}

impl BetaSet {
    /// Grid points, filtered by membership for uncertainty sets.
    pub fn grid(&self, points_per_axis: usize, dim: usize) -> Result<Vec<Array1<f64>>> {
        if points_per_axis < 2 {
            return Err(Error::InvalidInput("grid needs >= 2 points per axis".into()));
        }
        let bounds: Vec<(f64, f64)> = match self {
            BetaSet::Box { bounds } => {
                if bounds.len() != dim {
                    return Err(Error::DimensionMismatch("box dimension mismatch".into()));
                }
                bounds.clone()
            }
            BetaSet::Uncertainty(set) => {
                if set.data.p() != dim {
                    return Err(Error::DimensionMismatch("uncertainty set dimension mismatch".into()));
                }
                let r = set.ball_radius();
                vec![(-r, r); dim]
            }
        };
        let mut points = Vec::new();
        let total = points_per_axis.pow(dim as u32);
        for flat in 0..total {
            let mut beta = Array1::zeros(dim);
            let mut rest = flat;
            for (axis, &(lo, hi)) in bounds.iter().enumerate() {
                let idx = rest % points_per_axis;
                rest /= points_per_axis;
                beta[axis] = lo + (hi - lo) * idx as f64 / (points_per_axis - 1) as f64;
            }
            let keep = match self {
                BetaSet::Box { .. } => true,
                BetaSet::Uncertainty(set) => membership_fgood(&beta, set)?,
            };
            if keep {
                points.push(beta);
            }
        }
        if points.is_empty() {
            return Err(Error::Infeasible(
                "no grid point satisfies the uncertainty-set budgets".into(),
            ));
        }
        Ok(points)
    }
}

/// Saddle values computed exhaustively on finite grids. Weak duality
/// `maximin <= minimax` holds exactly on grids.
#[derive(Debug, Clone)]
pub struct SaddleResult {
    pub minimax_value: f64,
    pub maximin_value: f64,
    pub pi_star: Array1<f64>,
    pub beta_star: Array1<f64>,
    pub gap: f64,
}

/// `min` over the game's policy grid of `max` over the beta grid, and the
/// reversed order; exact on the grids, first optimum in grid order wins.
pub fn grid_minimax(
    game: &BilinearGame,
    beta_set: &BetaSet,
    beta_points_per_axis: usize,
) -> Result<SaddleResult> {
    let betas = beta_set.grid(beta_points_per_axis, game.coefficient_dim())?;
    // The cost is pi . (M beta + c); hoist the beta-side vector out of the
    // pair loop so the scan is allocation-free.
    let effects: Vec<Array1<f64>> = betas
        .iter()
        .map(|b| game.interaction.dot(b) + &game.policy_cost)
        .collect();

    let mut minimax = f64::INFINITY;
    let mut pi_star = 0usize;
    for (i, pi) in game.policies.iter().enumerate() {
        let mut worst = f64::NEG_INFINITY;
        for effect in &effects {
            worst = worst.max(pi.dot(effect));
        }
        if worst < minimax {
            minimax = worst;
            pi_star = i;
        }
    }

    let mut maximin = f64::NEG_INFINITY;
    let mut beta_star = 0usize;
    for (j, effect) in effects.iter().enumerate() {
        let mut best = f64::INFINITY;
        for pi in &game.policies {
            best = best.min(pi.dot(effect));
        }
        if best > maximin {
            maximin = best;
            beta_star = j;
        }
    }

    Ok(SaddleResult {
        minimax_value: minimax,
        maximin_value: maximin,
        pi_star: game.policies[pi_star].clone(),
        beta_star: betas[beta_star].clone(),
        gap: minimax - maximin,
    })
}

/// `min` over policies of `min` over the beta grid; the optimistic analogue.
pub fn grid_minmin(
    game: &BilinearGame,
    beta_set: &BetaSet,
    beta_points_per_axis: usize,
) -> Result<(f64, Array1<f64>, Array1<f64>)> {
    let betas = beta_set.grid(beta_points_per_axis, game.coefficient_dim())?;
    let effects: Vec<Array1<f64>> = betas
        .iter()
        .map(|b| game.interaction.dot(b) + &game.policy_cost)
        .collect();
    let mut best = f64::INFINITY;
    let mut arg = (0usize, 0usize);
    for (i, pi) in game.policies.iter().enumerate() {
        for (j, effect) in effects.iter().enumerate() {
            let v = pi.dot(effect);
            if v < best {
                best = v;
                arg = (i, j);
            }
        }
    }
    Ok((best, game.policies[arg.0].clone(), betas[arg.1].clone()))
}

/// Outcome of the equivalence check between a coupled fit and the
/// corresponding grid optimization over the induced uncertainty set.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    /// False when the instance violates the convexity assumptions; the
    /// comparison is then not claimed rather than failed.
    pub claimed: bool,
    pub reason: Option<String>,
    pub bias: Bias,
    pub c1_star: f64,
    pub c2_star: f64,
    pub fitted_policy: Array1<f64>,
    pub grid_policy: Array1<f64>,
    pub policy_distance: f64,
    pub value_gap: f64,
    pub saddle: Option<SaddleResult>,
}

/// Fit the biased coupled problem, derive the loss/ball budgets at the fitted
/// coefficients, then solve the matching grid optimization over that
/// uncertainty set and compare policies.
///
/// Only bilinear games with policy sets independent of the model satisfy the
/// convexity assumptions; other problems report `claimed: false`.
#[allow(clippy::too_many_arguments)]
pub fn check_equivalence(
    data: &Dataset,
    unl: &crate::model::UnlabeledSet,
    problem: &OpCostProblem,
    c1: f64,
    c2: f64,
    bias: Bias,
    nm: &NelderMeadConfig,
    beta_points_per_axis: usize,
) -> Result<EquivalenceReport> {
    let OpCostProblem::Bilinear { game } = problem else {
        // Integer feasible sets (knapsack, staffing) and model-dependent
        // feasible sets (scheduling) fall outside the equivalence assumptions.
        return Ok(EquivalenceReport {
            claimed: false,
            reason: Some(format!(
                "{} instances violate the convexity assumptions (integer or model-dependent feasible set)",
                problem.kind_name()
            )),
            bias,
            c1_star: f64::NAN,
            c2_star: f64::NAN,
            fitted_policy: Array1::zeros(0),
            grid_policy: Array1::zeros(0),
            policy_distance: f64::NAN,
            value_gap: f64::NAN,
            saddle: None,
        });
    };

    let cfg = SimultaneousConfig { c1, c2, bias, problem };
    let fit = fit_simultaneous(data, unl, &cfg, nm)?;
    let c1_star = empirical_loss(LossKind::LeastSquares, data, &fit.model.beta)?;
    let c2_star = fit.model.beta.dot(&fit.model.beta);
    let fgood = UncertaintySet {
        loss_kind: LossKind::LeastSquares,
        data: data.clone(),
        c1_star,
        c2_star,
        q: 2.0,
        reference: fit.model.clone(),
        epsilon_slack: 0.0,
    };
    let beta_set = BetaSet::Uncertainty(fgood);

    let (grid_policy, value_gap, saddle) = match bias {
        Bias::Pessimistic => {
            let saddle = grid_minimax(game, &beta_set, beta_points_per_axis)?;
            let gap = saddle.gap;
            (saddle.pi_star.clone(), gap, Some(saddle))
        }
        Bias::Optimistic => {
            let (value, pi, _) = grid_minmin(game, &beta_set, beta_points_per_axis)?;
            (pi, (value - fit.policy.objective_value).abs(), None)
        }
    };
    let policy_distance = (&grid_policy - &fit.policy.policy)
        .iter()
        .map(|d| d * d)
        .sum::<f64>()
        .sqrt();
    Ok(EquivalenceReport {
        claimed: true,
        reason: None,
        bias,
        c1_star,
        c2_star,
        fitted_policy: fit.policy.policy.clone(),
        grid_policy,
        policy_distance,
        value_gap,
        saddle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::bilinear::box_policy_grid;
    use approx::assert_abs_diff_eq;
    use ndarray::{arr1, arr2, Array};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn square_data() -> Dataset {
        Dataset::new(
            arr2(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]),
            arr1(&[1.0, -1.0, 0.5]),
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    #[test]
    fn reference_is_member() {
        let data = square_data();
        let f_star = crate::model::ridge_closed_form(&data, 0.1).unwrap();
        let set = build_fgood(&data, &f_star, 0.5, 10.0, LossKind::LeastSquares, 2.0).unwrap();
        assert!(membership_fgood(&f_star.beta, &set).unwrap());
    }

    #[test]
    fn loss_budget_violation_excludes() {
        let data = square_data();
        let f_star = crate::model::ridge_closed_form(&data, 0.1).unwrap();
        let set = build_fgood(&data, &f_star, 0.5, 1e6, LossKind::LeastSquares, 2.0).unwrap();
        // Push far enough that the loss exceeds the budget by more than 1.
        let mut beta = f_star.beta.clone();
        beta[0] += 100.0;
        assert!(!membership_fgood(&beta, &set).unwrap());
        assert!(empirical_loss(LossKind::LeastSquares, &data, &beta).unwrap() > set.c1_star + 1.0);
    }

    #[test]
    fn membership_boundary_matches_loss_bisection() {
        let data = square_data();
        let f_star = crate::model::ridge_closed_form(&data, 0.1).unwrap();
        let set = build_fgood(&data, &f_star, 2.0, 1e9, LossKind::LeastSquares, 2.0).unwrap();
        let dir = arr1(&[1.0, 0.5]);
        // Bisect on the membership predicate.
        let (mut lo, mut hi) = (0.0f64, 1e3f64);
        assert!(membership_fgood(&(&f_star.beta + &(&dir * lo)), &set).unwrap());
        assert!(!membership_fgood(&(&f_star.beta + &(&dir * hi)), &set).unwrap());
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if membership_fgood(&(&f_star.beta + &(&dir * mid)), &set).unwrap() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_membership = 0.5 * (lo + hi);
        // Independent bisection on the smooth loss-minus-budget function.
        let (mut lo2, mut hi2) = (0.0f64, 1e3f64);
        let excess = |t: f64| {
            empirical_loss(LossKind::LeastSquares, &data, &(&f_star.beta + &(&dir * t))).unwrap()
                - set.c1_star
        };
        for _ in 0..80 {
            let mid = 0.5 * (lo2 + hi2);
            if excess(mid) <= 0.0 {
                lo2 = mid;
            } else {
                hi2 = mid;
            }
        }
        let t_loss = 0.5 * (lo2 + hi2);
        assert_abs_diff_eq!(t_membership, t_loss, epsilon = 1e-9);
    }

    #[test]
    fn sampled_members_satisfy_both_inequalities() {
        let mut rng = ChaCha8Rng::seed_from_u64(111);
        let data = square_data();
        let f_star = crate::model::ridge_closed_form(&data, 0.1).unwrap();
        let set = build_fgood(&data, &f_star, 1.0, 4.0, LossKind::LeastSquares, 2.0).unwrap();
        let mut members = 0;
        for _ in 0..20000 {
            let beta = Array::from_shape_fn(2, |_| rng.gen_range(-2.5..2.5));
            if membership_fgood(&beta, &set).unwrap() {
                members += 1;
                assert!(empirical_loss(LossKind::LeastSquares, &data, &beta).unwrap() <= set.c1_star);
                assert!(beta.dot(&beta) <= set.c2_star);
            }
            if members >= 1000 {
                break;
            }
        }
        assert!(members >= 1000, "sampler found only {members} members");
    }

    #[test]
    fn least_squares_members_are_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(112);
        let data = square_data();
        let f_star = crate::model::ridge_closed_form(&data, 0.1).unwrap();
        let set = build_fgood(&data, &f_star, 1.5, 6.0, LossKind::LeastSquares, 2.0).unwrap();
        let mut pairs = 0;
        let mut member_pool = Vec::new();
        while member_pool.len() < 200 {
            let beta = Array::from_shape_fn(2, |_| rng.gen_range(-3.0..3.0));
            if membership_fgood(&beta, &set).unwrap() {
                member_pool.push(beta);
            }
        }
        while pairs < 1000 {
            let a = &member_pool[rng.gen_range(0..member_pool.len())];
            let b = &member_pool[rng.gen_range(0..member_pool.len())];
            let mid = (a + b) * 0.5;
            assert!(membership_fgood(&mid, &set).unwrap(), "midpoint escaped the set");
            pairs += 1;
        }
    }

    #[test]
    fn ramp_set_has_nonconvex_witness() {
        // One positive and one negative instance at the same feature point
        // give a loss profile flat at 1 on both tails and 2 - |beta| between,
        // so budget 1 keeps the two tails and drops the middle.
        let data = Dataset::new(
            arr2(&[[1.0], [1.0]]),
            arr1(&[1.0, -1.0]),
            vec!["x1".into()],
        )
        .unwrap();
        let reference = LinearModel::new(arr1(&[1.5])).unwrap();
        let set = UncertaintySet {
            loss_kind: LossKind::Ramp,
            data,
            c1_star: 1.0,
            c2_star: 4.0,
            q: 2.0,
            reference,
            epsilon_slack: 0.0,
        };
        let a = arr1(&[1.5]);
        let b = arr1(&[-1.5]);
        let mid = arr1(&[0.0]);
        assert!(membership_fgood(&a, &set).unwrap());
        assert!(membership_fgood(&b, &set).unwrap());
        assert!(!membership_fgood(&mid, &set).unwrap());
    }

    #[test]
    fn zero_one_set_has_nonconvex_witness() {
        let data = Dataset::new(
            arr2(&[[1.0, 0.0], [0.0, 1.0]]),
            arr1(&[1.0, 1.0]),
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let reference = LinearModel::new(arr1(&[1.0, 1.0])).unwrap();
        let set = UncertaintySet {
            loss_kind: LossKind::ZeroOne,
            data,
            c1_star: 1.0,
            c2_star: 25.0,
            q: 2.0,
            reference,
            epsilon_slack: 0.0,
        };
        let a = arr1(&[1.0, -3.0]);
        let b = arr1(&[-3.0, 1.0]);
        let mid = arr1(&[-1.0, -1.0]);
        assert!(membership_fgood(&a, &set).unwrap());
        assert!(membership_fgood(&b, &set).unwrap());
        assert!(!membership_fgood(&mid, &set).unwrap());
    }

    #[test]
    fn antisymmetric_game_saddle_at_zero() {
        let game = BilinearGame::new(
            arr2(&[[1.0]]),
            arr1(&[0.0]),
            box_policy_grid(&[(-1.0, 1.0)], 41).unwrap(),
        )
        .unwrap();
        let set = BetaSet::Box { bounds: vec![(-1.0, 1.0)] };
        let saddle = grid_minimax(&game, &set, 41).unwrap();
        assert_abs_diff_eq!(saddle.minimax_value, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(saddle.maximin_value, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(saddle.pi_star[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_game() {
        let game = BilinearGame::new(
            arr2(&[[0.0]]),
            arr1(&[0.0]),
            box_policy_grid(&[(-1.0, 1.0)], 11).unwrap(),
        )
        .unwrap();
        let set = BetaSet::Box { bounds: vec![(-1.0, 1.0)] };
        let saddle = grid_minimax(&game, &set, 11).unwrap();
        assert_eq!(saddle.minimax_value, 0.0);
        assert_eq!(saddle.maximin_value, 0.0);
        assert_eq!(saddle.gap, 0.0);
    }

    #[test]
    fn weak_duality_and_discretization_gap_on_random_games() {
        let mut rng = ChaCha8Rng::seed_from_u64(113);
        for _ in 0..30 {
            let m = arr2(&[
                [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
            ]);
            let c = arr1(&[rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)]);
            let points = 61;
            let game = BilinearGame::new(
                m,
                c,
                box_policy_grid(&[(-1.0, 1.0), (-1.0, 1.0)], points).unwrap(),
            )
            .unwrap();
            let set = BetaSet::Box { bounds: vec![(-1.0, 1.0), (-1.0, 1.0)] };
            let saddle = grid_minimax(&game, &set, points).unwrap();
            // Exact weak duality on finite grids.
            assert!(saddle.maximin_value <= saddle.minimax_value + 1e-12);
            // Sion guarantees a zero gap in the continuum; the grid gap is
            // bounded by the grid step times Lipschitz constants both ways.
            let step = 2.0 / (points - 1) as f64;
            let lip = game.policy_lipschitz((2.0f64).sqrt()) + game.beta_lipschitz();
            assert!(
                saddle.gap.abs() <= 2.0 * step * lip,
                "gap {} exceeds 2*step*Lipschitz {}",
                saddle.gap,
                2.0 * step * lip
            );
        }
    }

    #[test]
    fn budget_monotonicity_of_minimax() {
        let data = square_data();
        let f_star = crate::model::ridge_closed_form(&data, 0.05).unwrap();
        let game = BilinearGame::new(
            arr2(&[[1.0, -0.4], [0.3, 0.8]]),
            arr1(&[0.1, -0.2]),
            box_policy_grid(&[(-1.0, 1.0), (-1.0, 1.0)], 31).unwrap(),
        )
        .unwrap();
        let mut prev = f64::NEG_INFINITY;
        for eps in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let set = BetaSet::Uncertainty(
                build_fgood(&data, &f_star, eps, 9.0, LossKind::LeastSquares, 2.0).unwrap(),
            );
            let saddle = grid_minimax(&game, &set, 41).unwrap();
            assert!(
                saddle.minimax_value >= prev - 1e-12,
                "minimax decreased when the budget grew"
            );
            prev = saddle.minimax_value;
        }
    }

    #[test]
    fn tight_budget_is_infeasible() {
        let data = square_data();
        let reference = LinearModel::new(arr1(&[0.0, 0.0])).unwrap();
        let set = UncertaintySet {
            loss_kind: LossKind::LeastSquares,
            data,
            c1_star: -1.0, // impossible budget
            c2_star: 1.0,
            q: 2.0,
            reference,
            epsilon_slack: 0.0,
        };
        let err = BetaSet::Uncertainty(set).grid(21, 2);
        assert!(matches!(err, Err(Error::Infeasible(_))));
    }

    #[test]
    fn integer_problem_reports_not_claimed() {
        let data = square_data();
        let unl = crate::model::UnlabeledSet::new(Array::ones((2, 2))).unwrap();
        let spec = crate::problems::KnapsackSpec::new(arr1(&[0.0, 0.0]), 1).unwrap();
        let problem = OpCostProblem::Knapsack { spec };
        let nm = NelderMeadConfig::default();
        let report =
            check_equivalence(&data, &unl, &problem, 0.5, 0.1, Bias::Pessimistic, &nm, 21).unwrap();
        assert!(!report.claimed);
        assert!(report.reason.is_some());
    }
}
