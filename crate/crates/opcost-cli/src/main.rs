use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use opcost_cli::commands::{self, FitOverrides};

/// Decision-aware regression: coupled fits, cost-path sweeps, saddle-point
/// equivalence checks, and covering-number generalization bounds.
#[derive(Parser)]
#[command(name = "opcost", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Default)]
struct FitFlags {
    /// Override the training-data path from the config.
    #[arg(long)]
    train: Option<PathBuf>,
    /// Override the unlabeled-data path from the config.
    #[arg(long)]
    unlabeled: Option<PathBuf>,
    /// Override the test-data path from the config.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Ridge weight.
    #[arg(long)]
    c2: Option<f64>,
    /// optimistic | pessimistic.
    #[arg(long)]
    bias: Option<String>,
    /// Largest c1 on the sweep grid.
    #[arg(long)]
    c1_max: Option<f64>,
    /// Number of sweep grid points (zero included).
    #[arg(long)]
    c1_points: Option<usize>,
    /// Random restarts per fit.
    #[arg(long)]
    nm_restarts: Option<usize>,
    /// Objective-evaluation budget per start.
    #[arg(long)]
    nm_max_evals: Option<usize>,
    /// Simplex-diameter convergence tolerance.
    #[arg(long)]
    nm_tol: Option<f64>,
    /// Initial simplex step size.
    #[arg(long)]
    nm_scale: Option<f64>,
}

impl FitFlags {
    fn overrides(&self) -> FitOverrides {
        FitOverrides {
            train: self.train.clone(),
            unlabeled: self.unlabeled.clone(),
            test: self.test.clone(),
            c2: self.c2,
            bias: self.bias.clone(),
            c1_max: self.c1_max,
            c1_points: self.c1_points,
            nm_restarts: self.nm_restarts,
            nm_max_evals: self.nm_max_evals,
            nm_tol: self.nm_tol,
            nm_scale: self.nm_scale,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model at a fixed cost-coupling strength.
    Fit {
        /// Problem/config file.
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        flags: FitFlags,
        /// Cost-coupling strength.
        #[arg(long)]
        c1: f64,
        /// Random seed for the multi-start optimizer.
        #[arg(long)]
        seed: u64,
        /// Write the one-row result table here (stdout otherwise).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the coupling strength over a grid and tabulate the cost path.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        flags: FitFlags,
        #[arg(long)]
        seed: u64,
        /// Output table path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Covering-number and generalization-bound report for a constrained
    /// class described in the config.
    Bound {
        #[arg(long)]
        config: PathBuf,
        /// Sample matrix (unlabeled-style CSV, no label column).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Write the per-epsilon table here (plus a .summary file).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count integer points in the l1 ball, optionally intersected with
    /// integer constraint rows.
    Count {
        /// Dimension.
        #[arg(long)]
        p: usize,
        /// l1 radius.
        #[arg(long)]
        k: u64,
        /// Repeatable: "c1,...,cp:bound" with integer entries.
        #[arg(long = "constraint")]
        constraints: Vec<String>,
    },
    /// Compare a biased coupled fit against the matching grid optimization
    /// over its induced uncertainty set.
    Rocheck {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        flags: FitFlags,
        /// Coupling strength for the fit.
        #[arg(long, default_value_t = 1.0)]
        c1: f64,
        #[arg(long)]
        seed: u64,
        /// Points per axis of the coefficient grid.
        #[arg(long, default_value_t = 201)]
        beta_grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic scenario (data files plus a config).
    Gen {
        /// scheduling | housing | callcenter | ro-demo.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        /// Training rows.
        #[arg(long)]
        n: Option<usize>,
        /// Label noise standard deviation.
        #[arg(long)]
        noise: Option<f64>,
        /// Test rows as a fraction of training rows.
        #[arg(long)]
        test_fraction: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit { config, flags, c1, seed, out } => {
            commands::run_fit(config, &flags.overrides(), *c1, *seed, out.as_deref())
        }
        Command::Sweep { config, flags, seed, out } => {
            commands::run_sweep(config, &flags.overrides(), *seed, out)
        }
        Command::Bound { config, data, out } => {
            commands::run_bound(config, data.as_deref(), out.as_deref())
        }
        Command::Count { p, k, constraints } => commands::run_count(*p, *k, constraints),
        Command::Rocheck { config, flags, c1, seed, beta_grid, out } => commands::run_rocheck(
            config,
            &flags.overrides(),
            *c1,
            *seed,
            *beta_grid,
            out.as_deref(),
        ),
        Command::Gen { scenario, seed, out_dir, n, noise, test_fraction } => {
            commands::run_gen(scenario, *seed, out_dir, *n, *noise, *test_fraction)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
