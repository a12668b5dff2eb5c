//! Derivative-free minimization by the Nelder-Mead simplex method with
//! deterministic multi-start.

use ndarray::Array1;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Simplex-method settings. The reflection/expansion/contraction/shrink
/// coefficients default to the standard 1, 2, 1/2, 1/2.
#[derive(Debug, Clone)]
pub struct NelderMeadConfig {
    /// Absolute step used to build the initial simplex around a start point.
    pub initial_simplex_scale: f64,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Per-start budget of objective evaluations.
    pub max_evals: usize,
    /// A run stops once every vertex lies within this distance of the best.
    pub convergence_tol: f64,
    /// Additional random starts beyond the caller-provided ones.
    pub num_restarts: usize,
    pub seed: u64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            initial_simplex_scale: 0.5,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            max_evals: 4000,
            convergence_tol: 1e-9,
            num_restarts: 4,
            seed: 0,
        }
    }
}

impl NelderMeadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.reflection > 0.0) {
            return Err(Error::InvalidInput("reflection must be > 0".into()));
        }
        if !(self.expansion > 1.0) {
            return Err(Error::InvalidInput("expansion must be > 1".into()));
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return Err(Error::InvalidInput("contraction must be in (0,1)".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidInput("shrink must be in (0,1)".into()));
        }
        if !(self.initial_simplex_scale > 0.0) {
            return Err(Error::InvalidInput("initial simplex scale must be > 0".into()));
        }
        if !(self.convergence_tol >= 0.0) {
            return Err(Error::InvalidInput("convergence tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub beta: Array1<f64>,
    pub value: f64,
    /// False when every start exhausted its evaluation budget before the
    /// simplex collapsed below the tolerance.
    pub converged: bool,
    pub evals: usize,
}

/// Minimize from `init` plus `num_restarts` seeded random starts; the best
/// vertex over all runs wins. Identical seeds give identical results.
pub fn nelder_mead_minimize<F>(
    mut objective: F,
    init: &Array1<f64>,
    cfg: &NelderMeadConfig,
) -> Result<NelderMeadResult>
where
    F: FnMut(&Array1<f64>) -> Result<f64>,
{
    minimize_multi_start(&mut objective, std::slice::from_ref(init), cfg)
}

/// Like [`nelder_mead_minimize`] with several deterministic starts; random
/// restarts perturb the first one.
pub fn minimize_multi_start<F>(
    objective: &mut F,
    starts: &[Array1<f64>],
    cfg: &NelderMeadConfig,
) -> Result<NelderMeadResult>
where
    F: FnMut(&Array1<f64>) -> Result<f64>,
{
    cfg.validate()?;
    if starts.is_empty() {
        return Err(Error::InvalidInput("need at least one start point".into()));
    }
    let p = starts[0].len();
    if p == 0 {
        return Err(Error::InvalidInput("zero-dimensional start".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut all_starts: Vec<Array1<f64>> = starts.to_vec();
    for _ in 0..cfg.num_restarts {
        let jitter = 3.0 * cfg.initial_simplex_scale;
        let start =
            Array1::from_shape_fn(p, |j| starts[0][j] + rng.gen_range(-jitter..jitter));
        all_starts.push(start);
    }

    let mut best: Option<NelderMeadResult> = None;
    let mut total_evals = 0usize;
    for start in &all_starts {
        if start.len() != p {
            return Err(Error::DimensionMismatch("start points differ in length".into()));
        }
        let run = single_run(objective, start, cfg)?;
        total_evals += run.evals;
        best = Some(match best {
            None => run,
            Some(b) => {
                if run.value < b.value || (run.value == b.value && run.converged && !b.converged) {
                    run
                } else {
                    b
                }
            }
        });
    }
    let mut out = best.expect("at least one start");
    out.evals = total_evals;
    Ok(out)
}

fn single_run<F>(objective: &mut F, init: &Array1<f64>, cfg: &NelderMeadConfig) -> Result<NelderMeadResult>
where
    F: FnMut(&Array1<f64>) -> Result<f64>,
{
    let p = init.len();
    let mut evals = 0usize;
    let mut eval = |x: &Array1<f64>, evals: &mut usize| -> Result<f64> {
        *evals += 1;
        let v = objective(x)?;
        if v.is_nan() {
            return Err(Error::InvalidInput("objective returned NaN".into()));
        }
        Ok(v)
    };

    let mut simplex: Vec<(Array1<f64>, f64)> = Vec::with_capacity(p + 1);
    let v0 = eval(init, &mut evals)?;
    simplex.push((init.clone(), v0));
    for j in 0..p {
        let mut x = init.clone();
        x[j] += cfg.initial_simplex_scale;
        let v = eval(&x, &mut evals)?;
        simplex.push((x, v));
    }

    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(simplex[0].0.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0f64, f64::max);
        if diameter <= cfg.convergence_tol {
            converged = true;
            break;
        }
        if evals >= cfg.max_evals {
            break;
        }

        let worst = simplex[p].clone();
        let second_worst_val = simplex[p - 1].1;
        let best_val = simplex[0].1;
        let mut centroid = Array1::<f64>::zeros(p);
        for (x, _) in &simplex[..p] {
            centroid += x;
        }
        centroid /= p as f64;

        let reflected = &centroid + &((&centroid - &worst.0) * cfg.reflection);
        let f_reflected = eval(&reflected, &mut evals)?;

        if f_reflected < best_val {
            let expanded = &centroid + &((&reflected - &centroid) * cfg.expansion);
            let f_expanded = eval(&expanded, &mut evals)?;
            simplex[p] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
        } else if f_reflected < second_worst_val {
            simplex[p] = (reflected, f_reflected);
        } else {
            let (contracted, f_contracted) = if f_reflected < worst.1 {
                let c = &centroid + &((&reflected - &centroid) * cfg.contraction);
                let f = eval(&c, &mut evals)?;
                (c, f)
            } else {
                let c = &centroid + &((&worst.0 - &centroid) * cfg.contraction);
                let f = eval(&c, &mut evals)?;
                (c, f)
            };
            if f_contracted < worst.1.min(f_reflected) {
                simplex[p] = (contracted, f_contracted);
            } else {
                let best_point = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    v.0 = &best_point + &((&v.0 - &best_point) * cfg.shrink);
                    v.1 = eval(&v.0, &mut evals)?;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(NelderMeadResult {
        beta: simplex[0].0.clone(),
        value: simplex[0].1,
        converged,
        evals,
    })
}
