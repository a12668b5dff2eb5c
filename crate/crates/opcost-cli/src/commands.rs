//! Command implementations behind the CLI dispatch.

use std::path::{Path, PathBuf};

use opcost_core::bounds::{self, IntegerConstraint, LatticeCountQuery};
use opcost_core::model::{least_squares_loss, r_squared, Dataset, UnlabeledSet};
use opcost_core::optimizer::{
    fit_simultaneous, sweep_c1, Bias, NelderMeadConfig, SimultaneousConfig, SweepRow,
};
use opcost_core::problems::OpCostProblem;
use opcost_core::robust::check_equivalence;

use crate::config::{self, parse_bias, parse_f64_list};
use crate::scenario::{generate_scenario, scenario_config_text, Scenario, ScenarioKind, ScenarioSpec};
use crate::table::{self, Table};
use crate::CliError;

/// Shared fit inputs resolved from a config file plus flag overrides.
pub struct FitInputs {
    pub data: Dataset,
    pub test: Option<Dataset>,
    pub unlabeled: UnlabeledSet,
    pub problem: OpCostProblem,
    pub c2: f64,
    pub bias: Bias,
    pub c1_max: f64,
    pub c1_points: usize,
    pub nm_restarts: usize,
    pub nm_max_evals: usize,
    pub nm_tol: f64,
    pub nm_scale: f64,
}

impl FitInputs {
    pub fn nm(&self, seed: u64) -> NelderMeadConfig {
        NelderMeadConfig {
            seed,
            num_restarts: self.nm_restarts,
            max_evals: self.nm_max_evals,
            convergence_tol: self.nm_tol,
            initial_simplex_scale: self.nm_scale,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct FitOverrides {
    pub train: Option<PathBuf>,
    pub unlabeled: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub c2: Option<f64>,
    pub bias: Option<String>,
    pub c1_max: Option<f64>,
    pub c1_points: Option<usize>,
    pub nm_restarts: Option<usize>,
    pub nm_max_evals: Option<usize>,
    pub nm_tol: Option<f64>,
    pub nm_scale: Option<f64>,
}

pub fn resolve_fit_inputs(config_path: &Path, over: &FitOverrides) -> Result<FitInputs, CliError> {
    let mut cfg = config::load_config(config_path)?;
    let from_cfg_train = cfg.take_path("train");
    let from_cfg_unl = cfg.take_path("unlabeled");
    let from_cfg_test = cfg.take_path("test");
    let train_path = over
        .train
        .clone()
        .or(from_cfg_train)
        .ok_or_else(|| CliError::Parse("no training data: pass --train or set 'train'".into()))?;
    let unl_path = over.unlabeled.clone().or(from_cfg_unl).ok_or_else(|| {
        CliError::Parse("no unlabeled data: pass --unlabeled or set 'unlabeled'".into())
    })?;
    let test_path = over.test.clone().or(from_cfg_test);
    let c2 = match over.c2 {
        Some(v) => {
            cfg.take("c2");
            v
        }
        None => cfg
            .take_parsed::<f64>("c2")?
            .ok_or_else(|| CliError::Parse("no ridge weight: pass --c2 or set 'c2'".into()))?,
    };
    let bias = match &over.bias {
        Some(raw) => {
            cfg.take("bias");
            parse_bias(raw)?
        }
        None => parse_bias(&cfg.take("bias").unwrap_or_else(|| "optimistic".into()))?,
    };
    let c1_max = match over.c1_max {
        Some(v) => {
            cfg.take("c1_max");
            v
        }
        None => cfg.take_parsed::<f64>("c1_max")?.unwrap_or(1.0),
    };
    let c1_points = match over.c1_points {
        Some(v) => {
            cfg.take("c1_points");
            v
        }
        None => cfg.take_parsed::<usize>("c1_points")?.unwrap_or(21),
    };
    let nm_restarts = match over.nm_restarts {
        Some(v) => {
            cfg.take("nm_restarts");
            v
        }
        None => cfg.take_parsed::<usize>("nm_restarts")?.unwrap_or(6),
    };
    let nm_max_evals = match over.nm_max_evals {
        Some(v) => {
            cfg.take("nm_max_evals");
            v
        }
        None => cfg.take_parsed::<usize>("nm_max_evals")?.unwrap_or(6000),
    };
    let nm_tol = match over.nm_tol {
        Some(v) => {
            cfg.take("nm_tol");
            v
        }
        None => cfg.take_parsed::<f64>("nm_tol")?.unwrap_or(1e-9),
    };
    let nm_scale = match over.nm_scale {
        Some(v) => {
            cfg.take("nm_scale");
            v
        }
        None => cfg.take_parsed::<f64>("nm_scale")?.unwrap_or(0.5),
    };
    let problem = config::problem_from_config(&mut cfg)?;
    cfg.finish()?;
    let data = table::load_dataset(&train_path)?;
    let test = test_path.map(|p| table::load_dataset(&p)).transpose()?;
    let unlabeled = table::load_unlabeled(&unl_path)?;
    Ok(FitInputs {
        data,
        test,
        unlabeled,
        problem,
        c2,
        bias,
        c1_max,
        c1_points,
        nm_restarts,
        nm_max_evals,
        nm_tol,
        nm_scale,
    })
}

/// The fixed sweep-table column set.
fn sweep_table(rows: &[SweepRow], p: usize) -> Table {
    let mut columns = vec![
        "c1".to_string(),
        "opcost".to_string(),
        "train_loss".to_string(),
        "penalized_objective".to_string(),
        "r2_train".to_string(),
        "r2_test".to_string(),
    ];
    for j in 1..=p {
        columns.push(format!("beta_{j}"));
    }
    let mut table = Table::new(columns);
    for row in rows {
        let mut cells = vec![
            row.c1,
            row.opcost,
            row.train_loss,
            row.penalized_objective,
            row.r2_train,
            row.r2_test.unwrap_or(f64::NAN),
        ];
        cells.extend(row.beta.iter().cloned());
        table.push_row(cells);
    }
    table
}

pub fn run_fit(
    config_path: &Path,
    over: &FitOverrides,
    c1: f64,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let inputs = resolve_fit_inputs(config_path, over)?;
    let nm = inputs.nm(seed);
    let cfg = SimultaneousConfig {
        c1,
        c2: inputs.c2,
        bias: inputs.bias,
        problem: &inputs.problem,
    };
    let fit = fit_simultaneous(&inputs.data, &inputs.unlabeled, &cfg, &nm)?;
    let train_loss = least_squares_loss(&fit.model, &inputs.data)?;
    let fitted = inputs.data.x.dot(&fit.model.beta);
    let r2_train = r_squared(&fitted, &inputs.data.y)?;
    let r2_test = inputs
        .test
        .as_ref()
        .map(|td| r_squared(&td.x.dot(&fit.model.beta), &td.y))
        .transpose()?;
    let row = SweepRow {
        c1,
        beta: fit.model.beta.clone(),
        opcost: fit.policy.objective_value,
        train_loss,
        penalized_objective: fit.objective,
        r2_train,
        r2_test,
        converged: fit.converged,
    };
    println!("problem   = {}", inputs.problem.kind_name());
    println!("c1        = {c1}");
    println!("opcost    = {}", row.opcost);
    println!("train_loss = {train_loss}");
    println!("r2_train  = {r2_train}");
    if let Some(r2) = r2_test {
        println!("r2_test   = {r2}");
    }
    println!("converged = {}", fit.converged);
    let text = sweep_table(std::slice::from_ref(&row), inputs.data.p()).to_csv();
    if let Some(path) = out {
        table::write_file(path, &text)?;
    } else {
        print!("{text}");
    }
    Ok(())
}

pub fn run_sweep(
    config_path: &Path,
    over: &FitOverrides,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let inputs = resolve_fit_inputs(config_path, over)?;
    let nm = inputs.nm(seed);
    let grid = opcost_core::optimizer::sweep::default_c1_grid(inputs.c1_max, inputs.c1_points)?;
    let report = sweep_c1(
        &inputs.data,
        &inputs.unlabeled,
        &grid,
        inputs.c2,
        inputs.bias,
        &inputs.problem,
        &nm,
        inputs.test.as_ref(),
    )?;
    let text = sweep_table(&report.rows, inputs.data.p()).to_csv();
    table::write_file(out, &text)?;
    println!("rows          = {}", report.rows.len());
    println!("cost_range    = {}", report.cost_range);
    if let Some(rel) = report.relative_cost_range {
        println!("cost_range_rel = {rel}");
    }
    println!("r2_train_range = {}", report.r2_train_range);
    println!("table         = {}", out.display());
    if !report.failures.is_empty() {
        for f in &report.failures {
            eprintln!("fit failed at c1 = {}: {}", f.c1, f.message);
        }
        return Err(CliError::Run(format!(
            "{} of {} grid points failed",
            report.failures.len(),
            grid.len()
        )));
    }
    Ok(())
}

pub fn run_bound(
    config_path: &Path,
    data_path: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut cfg = config::load_config(config_path)?;
    let data_path = data_path
        .map(Path::to_path_buf)
        .or_else(|| cfg.take_path("data"))
        .ok_or_else(|| CliError::Parse("no sample data: pass --data or set 'data'".into()))?;
    let spec = config::class_spec_from_config(&mut cfg)?;
    let eps_grid = parse_f64_list(
        &cfg.take("eps_grid")
            .ok_or_else(|| CliError::Parse("bound needs 'eps_grid'".into()))?,
    )?;
    let lipschitz: f64 = cfg.take_parsed("lipschitz")?.unwrap_or(1.0);
    let confidence_delta: f64 = cfg.take_parsed("confidence_delta")?.unwrap_or(0.05);
    let dudley_grid: usize = cfg
        .take_parsed("dudley_grid")?
        .unwrap_or(opcost_core::tol::DUDLEY_DEFAULT_GRID);
    cfg.finish()?;

    let unl = table::load_unlabeled(&data_path)?;
    let report =
        bounds::bound_report(&spec, &unl.x, &eps_grid, lipschitz, confidence_delta, dudley_grid)?;

    let mut t = Table::new(
        ["epsilon", "k0", "k", "count_p_k0", "count_pc_k", "covering_bound"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    for rec in &report.records {
        t.push_row(vec![
            rec.epsilon,
            rec.k0 as f64,
            rec.k.map(|k| k as f64).unwrap_or(f64::NAN),
            rec.count_p_k0 as f64,
            rec.count_pc_k.map(|c| c as f64).unwrap_or(f64::NAN),
            rec.covering_bound as f64,
        ]);
    }
    let summary = format!(
        "n = {}\nlambda_min = {}\nvacuous = {}\ndudley_value = {}\nlipschitz = {}\n\
         confidence_delta = {}\ndeviation_term = {}\nfinal_bound_excess = {}\n",
        report.n,
        report.lambda_min,
        report.vacuous,
        report.dudley_value,
        report.lipschitz,
        report.confidence_delta,
        report.deviation_term,
        report.final_bound_excess
    );
    print!("{}", t.to_csv());
    print!("{summary}");
    if let Some(path) = out {
        table::write_file(path, &t.to_csv())?;
        let mut summary_path = path.as_os_str().to_owned();
        summary_path.push(".summary");
        table::write_file(Path::new(&summary_path), &summary)?;
    }
    Ok(())
}

pub fn run_count(p: usize, k: u64, raw_constraints: &[String]) -> Result<(), CliError> {
    let count = if raw_constraints.is_empty() {
        bounds::count_l1_lattice(p, k)?
    } else {
        let mut constraints = Vec::new();
        for raw in raw_constraints {
            let (coeffs, bound) = raw.rsplit_once(':').ok_or_else(|| {
                CliError::Parse(format!("constraint '{raw}' is not 'c1,...,cp:bound'"))
            })?;
            let coeffs: Vec<i64> = coeffs
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<i64>()
                        .map_err(|_| CliError::Parse(format!("bad integer coefficient '{c}'")))
                })
                .collect::<Result<_, _>>()?;
            if coeffs.len() != p {
                return Err(CliError::Parse(format!(
                    "constraint '{raw}' has {} coefficients for p = {p}",
                    coeffs.len()
                )));
            }
            let bound: i64 = bound
                .trim()
                .parse()
                .map_err(|_| CliError::Parse(format!("bad integer bound in '{raw}'")))?;
            constraints.push(IntegerConstraint { coeffs, bound });
        }
        bounds::count_constrained_lattice(&LatticeCountQuery { p, k, constraints })?
    };
    println!("{count}");
    Ok(())
}

pub fn run_rocheck(
    config_path: &Path,
    over: &FitOverrides,
    c1: f64,
    seed: u64,
    beta_grid: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let inputs = resolve_fit_inputs(config_path, over)?;
    let nm = inputs.nm(seed);
    let report = check_equivalence(
        &inputs.data,
        &inputs.unlabeled,
        &inputs.problem,
        c1,
        inputs.c2,
        inputs.bias,
        &nm,
        beta_grid,
    )?;
    if !report.claimed {
        println!("equivalence not claimed: {}", report.reason.as_deref().unwrap_or("?"));
        return Ok(());
    }
    println!("bias            = {:?}", report.bias);
    println!("c1_star         = {}", report.c1_star);
    println!("c2_star         = {}", report.c2_star);
    println!("policy_distance = {}", report.policy_distance);
    println!("value_gap       = {}", report.value_gap);
    if let Some(saddle) = &report.saddle {
        println!("minimax         = {}", saddle.minimax_value);
        println!("maximin         = {}", saddle.maximin_value);
        println!("gap             = {}", saddle.gap);
    }
    let dim = report.fitted_policy.len();
    let mut columns = vec![
        "claimed".to_string(),
        "c1_star".to_string(),
        "c2_star".to_string(),
        "policy_distance".to_string(),
        "value_gap".to_string(),
        "minimax".to_string(),
        "maximin".to_string(),
    ];
    for j in 1..=dim {
        columns.push(format!("fit_pi_{j}"));
    }
    for j in 1..=dim {
        columns.push(format!("grid_pi_{j}"));
    }
    let mut t = Table::new(columns);
    let mut row = vec![
        1.0,
        report.c1_star,
        report.c2_star,
        report.policy_distance,
        report.value_gap,
        report.saddle.as_ref().map(|s| s.minimax_value).unwrap_or(f64::NAN),
        report.saddle.as_ref().map(|s| s.maximin_value).unwrap_or(f64::NAN),
    ];
    row.extend(report.fitted_policy.iter().cloned());
    row.extend(report.grid_policy.iter().cloned());
    t.push_row(row);
    if let Some(path) = out {
        table::write_file(path, &t.to_csv())?;
    } else {
        print!("{}", t.to_csv());
    }
    Ok(())
}

pub fn run_gen(
    kind: &str,
    seed: u64,
    out_dir: &Path,
    n: Option<usize>,
    noise: Option<f64>,
    test_fraction: Option<f64>,
) -> Result<(), CliError> {
    let kind = ScenarioKind::parse(kind)?;
    let mut spec = ScenarioSpec::new(kind, seed);
    if let Some(n) = n {
        spec.n = n;
    }
    if let Some(noise) = noise {
        spec.noise = noise;
    }
    if let Some(f) = test_fraction {
        spec.test_fraction = f;
    }
    let scenario = generate_scenario(&spec)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    write_scenario(&spec, &scenario, out_dir)?;
    println!("scenario  = {}", kind.name());
    println!("train     = {}", out_dir.join("train.csv").display());
    println!("unlabeled = {}", out_dir.join("unlabeled.csv").display());
    if scenario.test.is_some() {
        println!("test      = {}", out_dir.join("test.csv").display());
    }
    println!("config    = {}", out_dir.join("scenario.cfg").display());
    Ok(())
}

pub fn write_scenario(
    spec: &ScenarioSpec,
    scenario: &Scenario,
    out_dir: &Path,
) -> Result<(), CliError> {
    table::write_file(&out_dir.join("train.csv"), &table::dataset_to_csv(&scenario.train))?;
    table::write_file(
        &out_dir.join("unlabeled.csv"),
        &table::unlabeled_to_csv(&scenario.unlabeled, &scenario.train.feature_names),
    )?;
    if let Some(test) = &scenario.test {
        table::write_file(&out_dir.join("test.csv"), &table::dataset_to_csv(test))?;
    }
    table::write_file(&out_dir.join("scenario.cfg"), &scenario_config_text(spec, scenario))?;
    Ok(())
}
