use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorConfig, EstimatorId, TimeRandomization};
use crate::models::{
    builtin_model, default_parameters, BuiltinModel, BuiltinOptions, CrnReward, RunningReward, SdeReward,
    TerminalReward,
};

/// Version of the flat key/value experiment schema accepted by this build.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardShape {
    Linear,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunningRewardShape {
    None,
    Quadratic,
}

/// A single experiment, read from a flat TOML file. Unknown keys are errors.
///
/// ```toml
/// schema_version = 1
/// model = "ou"
/// theta = [1.0, 0.5]
/// x0 = [1.0]
/// horizon = 1.0
/// estimator = "gge"
/// n_samples = 10000
/// steps_main = 256
/// seed = 42
/// output_path = "ou-gge.json"
/// report_format = "json"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_features: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal_reward: Option<RewardShape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub running_reward: Option<RunningRewardShape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward_species: Option<usize>,

    pub estimator: String,
    pub n_samples: usize,
    #[serde(default = "defaults::steps_main")]
    pub steps_main: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps_aux: Option<usize>,
    #[serde(default = "defaults::n_aux")]
    pub n_aux: usize,
    #[serde(default)]
    pub randomization: TimeRandomization,
    #[serde(default = "defaults::thinning_beta")]
    pub thinning_beta: f64,
    #[serde(default = "defaults::fd_step")]
    pub fd_step: f64,
    pub seed: u64,

    pub output_path: PathBuf,
    #[serde(default)]
    pub report_format: ReportFormat,
}

mod defaults {
    pub fn steps_main() -> usize {
        256
    }
    pub fn n_aux() -> usize {
        1
    }
    pub fn thinning_beta() -> f64 {
        1.0
    }
    pub fn fd_step() -> f64 {
        1e-3
    }
}

/// Initial condition of a resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Continuous(Vec<f64>),
    Counts(Vec<i64>),
}

/// Everything needed to run an experiment, after validation.
pub struct ResolvedExperiment {
    pub model: BuiltinModel<f64>,
    pub estimator: EstimatorId,
    pub theta: Vec<f64>,
    pub x0: InitialState,
    pub estimator_config: EstimatorConfig<f64>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }

    pub fn estimator_config(&self) -> EstimatorConfig<f64> {
        EstimatorConfig {
            n_samples: self.n_samples,
            steps_main: self.steps_main,
            steps_aux: self.steps_aux,
            n_aux: self.n_aux,
            randomization: self.randomization,
            thinning_beta: self.thinning_beta,
            fd_step: self.fd_step,
            seed: self.seed,
        }
    }

    /// Validates ids and numeric fields and builds the model.
    pub fn resolve(&self) -> Result<ResolvedExperiment> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let estimator: EstimatorId = self.estimator.parse()?;
        let estimator_config = self.estimator_config();
        estimator_config.validate()?;

        let (default_theta, default_x0) = default_parameters(&self.model, self.n_features)?;
        let sde_reward = match (self.terminal_reward, self.running_reward) {
            (None, None) => None,
            (terminal, running) => Some(SdeReward {
                terminal: match terminal {
                    Some(RewardShape::Linear) => TerminalReward::Linear,
                    Some(RewardShape::Quadratic) => TerminalReward::Quadratic,
                    None if self.model == "ou" || self.model == "feature-drift" => TerminalReward::Quadratic,
                    None => TerminalReward::Linear,
                },
                running: match running {
                    Some(RunningRewardShape::Quadratic) => RunningReward::Quadratic,
                    _ => RunningReward::None,
                },
            }),
        };
        let mut options = BuiltinOptions {
            n_features: self.n_features,
            horizon: self.horizon,
            sde_reward,
            crn_reward: None,
        };
        let probe = builtin_model::<f64>(&self.model, &BuiltinOptions { horizon: self.horizon, n_features: self.n_features, ..Default::default() })?;
        if let BuiltinModel::Crn(_) = probe {
            if self.running_reward.is_some() {
                return Err(Error::Config("running_reward applies to SDE models only".into()));
            }
            options.sde_reward = None;
            if self.terminal_reward.is_some() || self.reward_species.is_some() {
                let species = self.reward_species.unwrap_or(default_x0.len() - 1);
                options.crn_reward = Some(match self.terminal_reward.unwrap_or(RewardShape::Linear) {
                    RewardShape::Linear => CrnReward::Linear { species },
                    RewardShape::Quadratic => CrnReward::Quadratic { species },
                });
            }
        } else if self.reward_species.is_some() {
            return Err(Error::Config("reward_species applies to reaction networks only".into()));
        }
        let model = builtin_model::<f64>(&self.model, &options)?;

        let theta = self.theta.clone().unwrap_or(default_theta);
        if theta.len() != model.param_count() {
            return Err(Error::Config(format!(
                "model `{}` takes {} parameters, config gives {}",
                self.model,
                model.param_count(),
                theta.len()
            )));
        }
        crate::models::ParamVector::new(theta.clone())?;
        let x0 = self.x0.clone().unwrap_or(default_x0);
        if x0.len() != model.state_dim() || x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(format!(
                "x0 must hold {} finite values, got {:?}",
                model.state_dim(),
                x0
            )));
        }
        let x0 = match &model {
            BuiltinModel::Sde(_) => {
                if !estimator.for_sde() {
                    return Err(Error::EstimatorModelMismatch {
                        estimator: estimator.as_str(),
                        kind: "sde",
                    });
                }
                InitialState::Continuous(x0)
            }
            BuiltinModel::Crn(_) => {
                if estimator.for_sde() {
                    return Err(Error::EstimatorModelMismatch {
                        estimator: estimator.as_str(),
                        kind: "crn",
                    });
                }
                if x0.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
                    return Err(Error::Config(format!("x0 {x0:?} must be nonnegative integer counts")));
                }
                InitialState::Counts(x0.iter().map(|v| *v as i64).collect())
            }
        };
        Ok(ResolvedExperiment {
            model,
            estimator,
            theta,
            x0,
            estimator_config,
        })
    }
}
