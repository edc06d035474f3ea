use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{sde_replicate, EstimatorConfig, EstimatorId};
use crate::models::{FeatureDrift, SdeReward};
use crate::rng::Stream;
use crate::stats::median;

/// Settings shared by every cell of a scaling benchmark.
#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    /// Timed replicates per cell; at least 100.
    pub replicates: usize,
    /// Untimed replicates run first.
    pub warmup: usize,
    pub horizon: f64,
    pub x0: f64,
    pub theta_value: f64,
    pub estimator: EstimatorConfig<f64>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            replicates: 200,
            warmup: 20,
            horizon: 1.0,
            x0: 0.5,
            theta_value: 0.1,
            estimator: EstimatorConfig {
                steps_main: 64,
                n_aux: 8,
                ..EstimatorConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub n: usize,
    pub estimator: String,
    pub median_seconds: f64,
    /// Time relative to the smallest n for the same estimator.
    pub ratio: f64,
}

/// Median per-replicate wall time of each estimator on `feature-drift(n)`.
///
/// Replicates run sequentially on one thread. Replicate `r` uses the same
/// stream for every n, so cells differ only in the parameter count.
pub fn scaling_benchmark(
    n_values: &[usize],
    estimator_ids: &[EstimatorId],
    base: &BenchmarkConfig,
) -> Result<Vec<BenchmarkRow>> {
    if n_values.is_empty() || n_values.contains(&0) {
        return Err(Error::Config("n_values must be a nonempty list of positive counts".into()));
    }
    if base.replicates < 100 {
        return Err(Error::Config(format!("at least 100 timed replicates required, got {}", base.replicates)));
    }
    base.estimator.validate()?;
    let n_min = *n_values.iter().min().expect("nonempty");
    let mut rows = Vec::new();
    for &id in estimator_ids {
        if !id.for_sde() {
            return Err(Error::EstimatorModelMismatch {
                estimator: id.as_str(),
                kind: "sde",
            });
        }
        let mut cells = Vec::new();
        for &n in n_values {
            cells.push((n, time_cell(id, n, base)?));
        }
        let reference = cells
            .iter()
            .find(|(n, _)| *n == n_min)
            .map(|(_, t)| *t)
            .expect("n_min present");
        for (n, t) in cells {
            rows.push(BenchmarkRow {
                n,
                estimator: id.as_str().to_string(),
                median_seconds: t,
                ratio: t / reference,
            });
        }
    }
    Ok(rows)
}

fn time_cell(id: EstimatorId, n: usize, base: &BenchmarkConfig) -> Result<f64> {
    let model = FeatureDrift::new(n, base.horizon, SdeReward::QUADRATIC);
    let theta = vec![base.theta_value; n];
    let x0 = [base.x0];
    let seed = base.estimator.seed;
    for r in 0..base.warmup {
        let stream = Stream::for_replicate(seed, (base.replicates + r) as u64);
        std::hint::black_box(sde_replicate(id, &model, &theta, &x0, &base.estimator, &stream)?);
    }
    let mut times = Vec::with_capacity(base.replicates);
    for r in 0..base.replicates {
        let stream = Stream::for_replicate(seed, r as u64);
        let started = Instant::now();
        let out = sde_replicate(id, &model, &theta, &x0, &base.estimator, &stream)?;
        times.push(started.elapsed().as_secs_f64());
        std::hint::black_box(out);
    }
    Ok(median(&times).expect("at least one replicate"))
}

/// Renders rows as CSV with columns `n,estimator,median_seconds,ratio`.
pub fn benchmark_csv(rows: &[BenchmarkRow]) -> String {
    let mut out = String::from("n,estimator,median_seconds,ratio\n");
    for r in rows {
        out.push_str(&format!("{},{},{:e},{}\n", r.n, r.estimator, r.median_seconds, r.ratio));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_n_has_unit_ratio() {
        let config = BenchmarkConfig {
            replicates: 100,
            warmup: 2,
            estimator: EstimatorConfig {
                steps_main: 8,
                n_aux: 1,
                ..EstimatorConfig::default()
            },
            ..BenchmarkConfig::default()
        };
        let rows = scaling_benchmark(&[1], &[EstimatorId::GeneratorGradient, EstimatorId::Pathwise], &config).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.ratio == 1.0));
    }

    #[test]
    fn rejects_too_few_replicates_and_crn_estimators() {
        let few = BenchmarkConfig {
            replicates: 10,
            ..BenchmarkConfig::default()
        };
        assert!(matches!(
            scaling_benchmark(&[1], &[EstimatorId::Pathwise], &few),
            Err(Error::Config(_))
        ));
        assert!(scaling_benchmark(&[1], &[EstimatorId::Eipa], &BenchmarkConfig::default()).is_err());
    }
}
