//! Experiment configuration, orchestration, reports, benchmarking and self-test.

mod benchmark;
mod config;
mod report;
mod selftest;

pub use benchmark::{benchmark_csv, scaling_benchmark, BenchmarkConfig, BenchmarkRow};
pub use config::{
    ExperimentConfig, InitialState, ReportFormat, ResolvedExperiment, RewardShape, RunningRewardShape, SCHEMA_VERSION,
};
pub use report::{canonicalize_report, EstimateSummary, ExperimentReport, ReportRow, VOLATILE_FIELDS, Z95};
pub use selftest::{selftest, SelfTestOutcome};

pub use crate::stats::aggregate_statistics;

use crate::error::Result;
use crate::estimators::{estimate_crn, estimate_sde, GradientEstimate};
use crate::models::BuiltinModel;

/// Runs the estimator without writing anything.
pub fn execute_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let resolved = config.resolve()?;
    let estimate: GradientEstimate<f64> = match (&resolved.model, &resolved.x0) {
        (BuiltinModel::Sde(model), InitialState::Continuous(x0)) => estimate_sde(
            resolved.estimator,
            model.as_ref(),
            &resolved.theta,
            x0,
            &resolved.estimator_config,
        )?,
        (BuiltinModel::Crn(model), InitialState::Counts(x0)) => estimate_crn(
            resolved.estimator,
            model.as_ref(),
            &resolved.theta,
            x0,
            &resolved.estimator_config,
        )?,
        _ => unreachable!("resolve pairs the initial state with the model kind"),
    };
    Ok(ExperimentReport::new(config, &estimate))
}

/// Runs the experiment and writes the report to `config.output_path`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let report = execute_experiment(config)?;
    report.write(&config.output_path, config.report_format)?;
    Ok(report)
}
