use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use super::config::{ExperimentConfig, ReportFormat};
use crate::error::{Error, Result};
use crate::estimators::GradientEstimate;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

/// Fields that vary between otherwise identical runs.
pub const VOLATILE_FIELDS: [&str; 2] = ["generated_at_unix", "wall_time_seconds"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub param_index: usize,
    pub mean: f64,
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateSummary {
    pub estimator_id: String,
    pub n_samples: usize,
    pub seed: u64,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub toolkit_version: String,
    pub generated_at_unix: u64,
    pub seed: u64,
    pub wall_time_seconds: f64,
    pub config: ExperimentConfig,
    pub estimate: EstimateSummary,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig, estimate: &GradientEstimate<f64>) -> Self {
        let rows = estimate
            .mean
            .iter()
            .zip(&estimate.stderr)
            .enumerate()
            .map(|(param_index, (&mean, &stderr))| ReportRow {
                param_index,
                mean,
                stderr,
                ci_lo: mean - Z95 * stderr,
                ci_hi: mean + Z95 * stderr,
            })
            .collect();
        let generated_at_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        ExperimentReport {
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            generated_at_unix,
            seed: estimate.seed,
            wall_time_seconds: estimate.wall_time_seconds,
            config: config.clone(),
            estimate: EstimateSummary {
                estimator_id: estimate.estimator_id.as_str().to_string(),
                n_samples: estimate.n_samples,
                seed: estimate.seed,
                mean: estimate.mean.clone(),
                stderr: estimate.stderr.clone(),
            },
            rows,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Columns: `param_index,mean,stderr,ci_lo,ci_hi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("param_index,mean,stderr,ci_lo,ci_hi\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{:e},{:e},{:e},{:e}", r.param_index, r.mean, r.stderr, r.ci_lo, r.ci_hi);
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
        }
    }

    pub fn write(&self, path: &Path, format: ReportFormat) -> Result<()> {
        std::fs::write(path, self.render(format)).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Drops the volatile fields from a JSON report so runs can be compared byte for byte.
/// Text that is not JSON (CSV reports) is returned unchanged.
pub fn canonicalize_report(text: &str) -> String {
    match serde_json::from_str::<Value>(text) {
        Ok(mut value) => {
            strip(&mut value);
            serde_json::to_string(&value).expect("json value serializes")
        }
        Err(_) => text.to_string(),
    }
}

fn strip(value: &mut Value) {
    match value {
        Value::Object(map) => {
            for key in VOLATILE_FIELDS {
                map.remove(key);
            }
            map.values_mut().for_each(strip);
        }
        Value::Array(items) => items.iter_mut().for_each(strip),
        _ => {}
    }
}
