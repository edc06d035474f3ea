use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gengrad::harness::{benchmark_csv, selftest, BenchmarkConfig};
use gengrad::{
    builtin_model, check_adjoint_identity, run_experiment, scaling_benchmark, BuiltinModel, BuiltinOptions, Error,
    EstimatorConfig, EstimatorId, ExperimentConfig, SpaceTimeGrid,
};

/// Exit status when the self-test runs but a check fails.
const SELFTEST_FAILED: u8 = 1;

#[derive(Parser)]
#[command(name = "gengrad", version, about = "Monte Carlo parameter gradients for SDEs and reaction networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config and write its report.
    Estimate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare both sides of the adjoint identity on a 1-D grid; prints JSON.
    VerifyAdjoint {
        #[arg(long)]
        model: String,
        #[arg(long)]
        param: usize,
        /// Comma-separated θ; defaults to the catalog value.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, default_value_t = 401)]
        nx: usize,
        #[arg(long, default_value_t = 401)]
        nt: usize,
        #[arg(long, default_value_t = -8.0, allow_hyphen_values = true)]
        x_min: f64,
        #[arg(long, default_value_t = 8.0, allow_hyphen_values = true)]
        x_max: f64,
        #[arg(long, default_value_t = 1e-4)]
        fd_step: f64,
    },
    /// Median per-replicate time on feature-drift(n); prints CSV.
    BenchmarkScaling {
        #[arg(long, value_delimiter = ',', default_value = "1,8,64")]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "gge,pathwise")]
        estimators: Vec<String>,
        #[arg(long, default_value_t = 200)]
        replicates: usize,
        #[arg(long, default_value_t = 20)]
        warmup: usize,
        #[arg(long, default_value_t = 64)]
        steps_main: usize,
        #[arg(long, default_value_t = 8)]
        n_aux: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the CSV here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the oracle and closed-form checks.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::Estimate { config } => {
            let config = ExperimentConfig::load(&config)?;
            let report = run_experiment(&config)?;
            println!("param_index,mean,stderr,ci_lo,ci_hi");
            for r in &report.rows {
                println!("{},{},{},{},{}", r.param_index, r.mean, r.stderr, r.ci_lo, r.ci_hi);
            }
            eprintln!(
                "{} replicates of {} in {:.3}s; report written to {}",
                report.estimate.n_samples,
                report.estimate.estimator_id,
                report.wall_time_seconds,
                config.output_path.display()
            );
            Ok(0)
        }
        Command::VerifyAdjoint {
            model,
            param,
            theta,
            x0,
            horizon,
            nx,
            nt,
            x_min,
            x_max,
            fd_step,
        } => {
            let (default_theta, default_x0) = gengrad::models::default_parameters(&model, None)?;
            let options = BuiltinOptions {
                horizon,
                ..Default::default()
            };
            let BuiltinModel::Sde(sde) = builtin_model::<f64>(&model, &options)? else {
                return Err(Error::Config(format!("model `{model}` is not an SDE")));
            };
            let grid = SpaceTimeGrid::new(x_min, x_max, nx, sde.horizon(), nt)?;
            let theta = theta.unwrap_or(default_theta);
            let x0 = x0.unwrap_or(default_x0[0]);
            let report = check_adjoint_identity(sde.as_ref(), &theta, param, x0, &grid, fd_step)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(0)
        }
        Command::BenchmarkScaling {
            n,
            estimators,
            replicates,
            warmup,
            steps_main,
            n_aux,
            seed,
            output,
        } => {
            let ids = estimators
                .iter()
                .map(|s| s.parse::<EstimatorId>())
                .collect::<Result<Vec<_>, _>>()?;
            let config = BenchmarkConfig {
                replicates,
                warmup,
                estimator: EstimatorConfig {
                    steps_main,
                    n_aux,
                    seed,
                    ..EstimatorConfig::default()
                },
                ..BenchmarkConfig::default()
            };
            let rows = scaling_benchmark(&n, &ids, &config)?;
            let csv = benchmark_csv(&rows);
            print!("{csv}");
            if let Some(path) = output {
                std::fs::write(&path, csv).map_err(|source| Error::Io {
                    path: path.display().to_string(),
                    source,
                })?;
            }
            Ok(0)
        }
        Command::Selftest => {
            let outcomes = selftest();
            for o in &outcomes {
                println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
            }
            Ok(if outcomes.iter().all(|o| o.passed) { 0 } else { SELFTEST_FAILED })
        }
    }
}
