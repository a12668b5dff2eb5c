//! Synthetic scenario generation. Each generator is deterministic in its
//! seed and ships with a decision problem plus recommended fit settings.

use ndarray::{Array1, Array2};
use opcost_core::model::{Dataset, UnlabeledSet};
use opcost_core::optimizer::Bias;
use opcost_core::problems::bilinear::segment_simplex_grid;
use opcost_core::problems::dag::PrecedenceDag;
use opcost_core::problems::{BilinearGame, KnapsackSpec, OpCostProblem, StaffingSpec};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Scheduling,
    Housing,
    Callcenter,
    RoDemo,
}

impl ScenarioKind {
    pub fn parse(raw: &str) -> Result<Self, CliError> {
        match raw {
            "scheduling" => Ok(Self::Scheduling),
            "housing" => Ok(Self::Housing),
            "callcenter" => Ok(Self::Callcenter),
            "ro-demo" => Ok(Self::RoDemo),
            other => Err(CliError::Parse(format!(
                "unknown scenario '{other}' (scheduling | housing | callcenter | ro-demo)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Scheduling => "scheduling",
            Self::Housing => "housing",
            Self::Callcenter => "callcenter",
            Self::RoDemo => "ro-demo",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub n: usize,
    pub noise: f64,
    /// Test rows as a fraction of the training size.
    pub test_fraction: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, seed: u64) -> Self {
        let n = match kind {
            ScenarioKind::Scheduling => 40,
            ScenarioKind::Housing => 120,
            ScenarioKind::Callcenter => 200,
            ScenarioKind::RoDemo => 30,
        };
        let noise = match kind {
            ScenarioKind::Scheduling => 0.25,
            ScenarioKind::Housing => 2.0,
            ScenarioKind::Callcenter => 0.4,
            ScenarioKind::RoDemo => 0.1,
        };
        Self { kind, n, noise, test_fraction: 0.5, seed }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n < 4 {
            return Err(CliError::Parse("scenario needs n >= 4".into()));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(CliError::Parse("noise must be finite and >= 0".into()));
        }
        if !(0.0..=4.0).contains(&self.test_fraction) {
            return Err(CliError::Parse("test fraction must be in [0, 4]".into()));
        }
        Ok(())
    }
}

/// Fit settings shipped alongside the generated data.
#[derive(Debug, Clone)]
pub struct RecommendedFit {
    pub c2: f64,
    pub c1_max: f64,
    pub c1_points: usize,
    pub bias: Bias,
}

#[derive(Debug)]
pub struct Scenario {
    pub train: Dataset,
    pub test: Option<Dataset>,
    pub unlabeled: UnlabeledSet,
    pub problem: OpCostProblem,
    pub recommended: RecommendedFit,
    /// Ground truth used by the generator, for identifiability checks.
    pub beta_true: Array1<f64>,
}

pub fn generate_scenario(spec: &ScenarioSpec) -> Result<Scenario, CliError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.kind {
        ScenarioKind::Scheduling => scheduling_scenario(spec, &mut rng),
        ScenarioKind::Housing => housing_scenario(spec, &mut rng),
        ScenarioKind::Callcenter => callcenter_scenario(spec, &mut rng),
        ScenarioKind::RoDemo => ro_demo_scenario(spec, &mut rng),
    }
}

fn labels(
    x: &Array2<f64>,
    beta: &Array1<f64>,
    noise: f64,
    rng: &mut ChaCha8Rng,
) -> Array1<f64> {
    let mut y = x.dot(beta);
    for v in y.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v += noise * z;
    }
    y
}

/// Two station-load features with strong collinearity in the training data.
/// The flat direction of the loss moves the predicted route durations, which
/// is what gives the cost path its spread while the fit barely changes.
fn scheduling_scenario(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Result<Scenario, CliError> {
    let beta_true = Array1::from(vec![1.0, 0.5]);
    let draw = |rng: &mut ChaCha8Rng, rows: usize| {
        let mut x = Array2::zeros((rows, 2));
        for i in 0..rows {
            let base = rng.gen_range(0.5..2.5);
            x[(i, 0)] = base;
            x[(i, 1)] = 0.7 * base + rng.gen_range(-0.15..0.15);
        }
        x
    };
    let x = draw(rng, spec.n);
    let y = labels(&x, &beta_true, spec.noise, rng);
    let names = vec!["load".to_string(), "present".to_string()];
    let train = Dataset::new(x, y, names.clone())?;
    let test = test_split(spec, rng, |rng, rows| draw(rng, rows), &beta_true, &names)?;
    // Unlabeled stations spread away from the collinear ridge so the cost
    // responds to the flat direction.
    let mut xu = Array2::zeros((6, 2));
    for i in 0..6 {
        let base = rng.gen_range(0.8..2.2);
        xu[(i, 0)] = base;
        xu[(i, 1)] = 0.7 * base + rng.gen_range(-0.8..0.8f64).max(-0.6 * base);
    }
    let unlabeled = UnlabeledSet::new(xu)?;
    Ok(Scenario {
        train,
        test,
        unlabeled,
        problem: OpCostProblem::Scheduling { dag: PrecedenceDag::clinic_six_stations() },
        recommended: RecommendedFit { c2: 0.05, c1_max: 1.0, c1_points: 21, bias: Bias::Optimistic },
        beta_true,
    })
}

/// Thirteen property features, six listings on the market, pick three.
fn housing_scenario(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Result<Scenario, CliError> {
    let p = 13;
    let beta_true = Array1::from_shape_fn(p, |j| match j {
        0 => 8.0,  // rooms
        1 => -0.5, // age
        2 => 3.0,  // lot size
        _ => rng.gen_range(-1.0..1.0),
    });
    let draw = |rng: &mut ChaCha8Rng, rows: usize| {
        Array2::from_shape_fn((rows, p), |_| rng.gen_range(0.0..1.0))
    };
    let x = draw(rng, spec.n);
    let y = labels(&x, &beta_true, spec.noise, rng);
    let names: Vec<String> = (1..=p).map(|j| format!("f{j}")).collect();
    let train = Dataset::new(x, y, names.clone())?;
    let test = test_split(spec, rng, |rng, rows| draw(rng, rows), &beta_true, &names)?;
    let unlabeled = UnlabeledSet::new(draw(rng, 6))?;
    let fixed_costs = Array1::from(vec![1.8, 1.2, 0.9, 1.5, 0.7, 1.1]);
    Ok(Scenario {
        train,
        test,
        unlabeled,
        problem: OpCostProblem::Knapsack { spec: KnapsackSpec::new(fixed_costs, 3)? },
        recommended: RecommendedFit { c2: 0.5, c1_max: 2.0, c1_points: 21, bias: Bias::Pessimistic },
        beta_true,
    })
}

/// Thirty-six arrival-rate features (mostly binary calendar indicators) and
/// twenty-four half-hour periods to staff across three shifts.
fn callcenter_scenario(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Result<Scenario, CliError> {
    let p = 36;
    let beta_true = Array1::from_shape_fn(p, |j| {
        if j == 0 {
            1.6 // intercept-like always-on feature
        } else if j < 8 {
            rng.gen_range(-0.4..0.8)
        } else {
            rng.gen_range(-0.15..0.25)
        }
    });
    let draw = |rng: &mut ChaCha8Rng, rows: usize| {
        Array2::from_shape_fn((rows, p), |(_, j)| {
            if j == 0 {
                1.0
            } else if j < 30 {
                f64::from(rng.gen_bool(0.3))
            } else {
                rng.gen_range(0.0..1.0)
            }
        })
    };
    let x = draw(rng, spec.n);
    let y = labels(&x, &beta_true, spec.noise, rng);
    let names: Vec<String> = (1..=p).map(|j| format!("f{j}")).collect();
    let train = Dataset::new(x, y, names.clone())?;
    let test = test_split(spec, rng, |rng, rows| draw(rng, rows), &beta_true, &names)?;
    let unlabeled = UnlabeledSet::new(draw(rng, 24))?;
    Ok(Scenario {
        train,
        test,
        unlabeled,
        problem: OpCostProblem::Staffing { spec: StaffingSpec::three_shift_day() },
        recommended: RecommendedFit { c2: 0.3, c1_max: 1.5, c1_points: 21, bias: Bias::Optimistic },
        beta_true,
    })
}

/// A two-feature dataset with a two-policy bilinear game on the segment
/// simplex; the instance is convex, so the saddle machinery applies.
fn ro_demo_scenario(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Result<Scenario, CliError> {
    let beta_true = Array1::from(vec![0.8, -0.5]);
    let draw = |rng: &mut ChaCha8Rng, rows: usize| {
        Array2::from_shape_fn((rows, 2), |_| rng.gen_range(-1.0..1.0))
    };
    let x = draw(rng, spec.n);
    let y = labels(&x, &beta_true, spec.noise, rng);
    let names = vec!["u".to_string(), "v".to_string()];
    let train = Dataset::new(x, y, names.clone())?;
    let test = test_split(spec, rng, |rng, rows| draw(rng, rows), &beta_true, &names)?;
    // Any unlabeled rows work; the game ignores them but the fit API wants a
    // matching feature count.
    let unlabeled = UnlabeledSet::new(draw(rng, 4))?;
    let interaction = ndarray::arr2(&[[1.0, -0.6], [0.4, 0.9]]);
    let policy_cost = Array1::from(vec![0.2, -0.1]);
    let game = BilinearGame::new(interaction, policy_cost, segment_simplex_grid(201)?)?;
    Ok(Scenario {
        train,
        test,
        unlabeled,
        problem: OpCostProblem::Bilinear { game },
        recommended: RecommendedFit { c2: 0.5, c1_max: 1.0, c1_points: 11, bias: Bias::Pessimistic },
        beta_true,
    })
}

fn test_split(
    spec: &ScenarioSpec,
    rng: &mut ChaCha8Rng,
    draw: impl Fn(&mut ChaCha8Rng, usize) -> Array2<f64>,
    beta_true: &Array1<f64>,
    names: &[String],
) -> Result<Option<Dataset>, CliError> {
    let rows = (spec.n as f64 * spec.test_fraction).round() as usize;
    if rows < 2 {
        return Ok(None);
    }
    let x = draw(rng, rows);
    let y = labels(&x, beta_true, spec.noise, rng);
    Ok(Some(Dataset::new(x, y, names.to_vec())?))
}

/// The config text that `gen` writes next to the data files.
pub fn scenario_config_text(spec: &ScenarioSpec, scenario: &Scenario) -> String {
    let mut out = String::new();
    out.push_str(&format!("# generated scenario: {} (seed {})\n", spec.kind.name(), spec.seed));
    out.push_str("train = train.csv\n");
    out.push_str("unlabeled = unlabeled.csv\n");
    if scenario.test.is_some() {
        out.push_str("test = test.csv\n");
    }
    let rec = &scenario.recommended;
    out.push_str(&format!("c2 = {}\n", rec.c2));
    out.push_str(&format!("c1_max = {}\n", rec.c1_max));
    out.push_str(&format!("c1_points = {}\n", rec.c1_points));
    out.push_str(&format!(
        "bias = {}\n",
        match rec.bias {
            Bias::Optimistic => "optimistic",
            Bias::Pessimistic => "pessimistic",
        }
    ));
    match &scenario.problem {
        OpCostProblem::Scheduling { dag } => {
            out.push_str("problem = scheduling\n");
            out.push_str(&format!("dag_events = {}\n", dag.num_events()));
            out.push_str(&format!("dag_source = {}\n", dag.source_event()));
            out.push_str(&format!("dag_sink = {}\n", dag.sink_event()));
            let edges: Vec<String> = dag
                .edges()
                .iter()
                .map(|e| format!("{},{},{}", e.from_event, e.to_event, e.instance_index))
                .collect();
            out.push_str(&format!("dag_edges = {}\n", edges.join(";")));
        }
        OpCostProblem::Knapsack { spec } => {
            out.push_str("problem = knapsack\n");
            let costs: Vec<String> = spec.fixed_costs.iter().map(|c| format!("{c}")).collect();
            out.push_str(&format!("fixed_costs = {}\n", costs.join(",")));
            out.push_str(&format!("capacity = {}\n", spec.capacity));
        }
        OpCostProblem::Staffing { spec } => {
            out.push_str("problem = staffing\n");
            out.push_str(&format!("num_periods = {}\n", spec.num_periods()));
            let mut spans = Vec::new();
            for j in 0..spec.num_shifts() {
                let covered: Vec<usize> =
                    (0..spec.num_periods()).filter(|&i| spec.coverage[(i, j)] == 1).collect();
                spans.push(format!(
                    "{}-{}",
                    covered.first().unwrap(),
                    covered.last().unwrap()
                ));
            }
            out.push_str(&format!("shift_periods = {}\n", spans.join(";")));
            out.push_str(&format!("max_periods_per_shift = {}\n", spec.max_periods_per_shift));
        }
        OpCostProblem::Bilinear { game } => {
            out.push_str("problem = bilinear\n");
            let rows: Vec<String> = (0..game.policy_dim())
                .map(|i| {
                    (0..game.coefficient_dim())
                        .map(|j| format!("{}", game.interaction[(i, j)]))
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect();
            out.push_str(&format!("interaction = {}\n", rows.join("|")));
            let costs: Vec<String> = game.policy_cost.iter().map(|c| format!("{c}")).collect();
            out.push_str(&format!("policy_cost = {}\n", costs.join(",")));
            out.push_str(&format!("policy_grid = simplex:{}\n", game.policies.len()));
        }
    }
    out
}
