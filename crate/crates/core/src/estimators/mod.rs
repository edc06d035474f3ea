//! Gradient estimators for `∂θ v_θ(0, x0)` and their parallel driver.
//!
//! Every replicate owns a stream derived from `(seed, replicate index)`.
//! Replicates may run on any worker; aggregation always walks them in index
//! order, so an estimate is bit-reproducible from its inputs.

mod ctmc;
mod sde;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{CrnModel, SdeModel};
use crate::rng::Stream;
use crate::scalar::Scalar;
use crate::stats::aggregate_statistics;

pub use ctmc::{
    eipa_replicate, eipa_replicate_detailed, finite_difference_crn_replicate, girsanov_replicate, EipaReplicate,
};
pub use sde::{finite_difference_sde_replicate, generator_gradient_replicate, pathwise_forward_replicate};

/// Sub-stream labels inside one replicate.
pub(crate) mod label {
    pub const MAIN: u64 = 0;
    pub const TIME: u64 = 1;
    pub const AUX: u64 = 2;
    pub const THINNING: u64 = 3;
}

/// Law of the randomized evaluation time over `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeRandomization {
    #[default]
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig<S> {
    pub n_samples: usize,
    /// Euler steps on `[0, T]` for the main path.
    pub steps_main: usize,
    /// Euler steps on `[τ, T]` for auxiliary paths; `None` continues on the
    /// main grid (`steps_main − k` steps from node `k`).
    pub steps_aux: Option<usize>,
    pub n_aux: usize,
    pub randomization: TimeRandomization,
    /// Bernoulli spawn probability for auxiliary pairs (reaction networks).
    pub thinning_beta: S,
    /// Central-difference step of the finite-difference baselines.
    pub fd_step: S,
    pub seed: u64,
}

impl<S: Scalar> Default for EstimatorConfig<S> {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            steps_main: 256,
            steps_aux: None,
            n_aux: 1,
            randomization: TimeRandomization::Uniform,
            thinning_beta: S::one(),
            fd_step: S::of(1e-3),
            seed: 0,
        }
    }
}

impl<S: Scalar> EstimatorConfig<S> {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_samples == 0 {
            return fail("n_samples must be at least 1".into());
        }
        if self.steps_main == 0 {
            return fail("steps_main must be at least 1".into());
        }
        if self.steps_aux == Some(0) {
            return fail("steps_aux must be at least 1 when given".into());
        }
        if self.n_aux == 0 {
            return fail("n_aux must be at least 1".into());
        }
        if !(self.thinning_beta > S::zero() && self.thinning_beta <= S::one()) {
            return fail(format!("thinning_beta {} must lie in (0, 1]", self.thinning_beta));
        }
        if !(self.fd_step > S::zero()) || !self.fd_step.is_finite() {
            return fail(format!("fd_step {} must be positive", self.fd_step));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorId {
    #[serde(rename = "gge")]
    GeneratorGradient,
    #[serde(rename = "pathwise")]
    Pathwise,
    #[serde(rename = "fd-sde")]
    FiniteDifferenceSde,
    #[serde(rename = "eipa")]
    Eipa,
    #[serde(rename = "girsanov")]
    Girsanov,
    #[serde(rename = "fd-crn")]
    FiniteDifferenceCrn,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 6] = [
        EstimatorId::GeneratorGradient,
        EstimatorId::Pathwise,
        EstimatorId::FiniteDifferenceSde,
        EstimatorId::Eipa,
        EstimatorId::Girsanov,
        EstimatorId::FiniteDifferenceCrn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorId::GeneratorGradient => "gge",
            EstimatorId::Pathwise => "pathwise",
            EstimatorId::FiniteDifferenceSde => "fd-sde",
            EstimatorId::Eipa => "eipa",
            EstimatorId::Girsanov => "girsanov",
            EstimatorId::FiniteDifferenceCrn => "fd-crn",
        }
    }

    pub fn for_sde(self) -> bool {
        matches!(
            self,
            EstimatorId::GeneratorGradient | EstimatorId::Pathwise | EstimatorId::FiniteDifferenceSde
        )
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownEstimator(s.to_string()))
    }
}

/// Aggregated estimate of `∂θ v_θ(0, x0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate<S> {
    pub mean: Vec<S>,
    pub stderr: Vec<S>,
    pub n_samples: usize,
    pub wall_time_seconds: f64,
    pub estimator_id: EstimatorId,
    pub seed: u64,
}

/// Runs `replicate` for indices `0..n_samples` in parallel and returns the
/// replicates in index order.
pub fn collect_replicates<S, F>(n_samples: usize, seed: u64, replicate: F) -> Result<Vec<Vec<S>>>
where
    S: Scalar,
    F: Fn(&Stream) -> Result<Vec<S>> + Sync,
{
    (0..n_samples)
        .into_par_iter()
        .map(|r| replicate(&Stream::for_replicate(seed, r as u64)))
        .collect()
}

fn finish<S: Scalar>(
    samples: &[Vec<S>],
    started: Instant,
    estimator_id: EstimatorId,
    seed: u64,
) -> Result<GradientEstimate<S>> {
    let (mean, stderr) = aggregate_statistics(samples)?;
    Ok(GradientEstimate {
        mean,
        stderr,
        n_samples: samples.len(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        estimator_id,
        seed,
    })
}

fn check_params(theta: &[impl Sized], expected: usize) -> Result<()> {
    crate::error::check_len("parameter vector", theta.len(), expected)
}

/// One replicate of an SDE estimator; per-parameter estimators are evaluated
/// for every parameter on the same stream.
pub fn sde_replicate<S: Scalar, M: SdeModel<S> + ?Sized>(
    estimator: EstimatorId,
    model: &M,
    theta: &[S],
    x0: &[S],
    config: &EstimatorConfig<S>,
    stream: &Stream,
) -> Result<Vec<S>> {
    match estimator {
        EstimatorId::GeneratorGradient => generator_gradient_replicate(model, theta, x0, config, stream),
        EstimatorId::Pathwise => pathwise_forward_replicate(model, theta, x0, config, stream),
        EstimatorId::FiniteDifferenceSde => (0..model.param_count())
            .map(|i| finite_difference_sde_replicate(model, theta, x0, i, config, stream))
            .collect(),
        other => Err(Error::EstimatorModelMismatch {
            estimator: other.as_str(),
            kind: "sde",
        }),
    }
}

/// One replicate of a reaction-network estimator.
pub fn crn_replicate<S: Scalar, M: CrnModel<S> + ?Sized>(
    estimator: EstimatorId,
    model: &M,
    theta: &[S],
    x0: &[i64],
    config: &EstimatorConfig<S>,
    stream: &Stream,
) -> Result<Vec<S>> {
    match estimator {
        EstimatorId::Eipa => eipa_replicate(model, theta, x0, config, stream),
        EstimatorId::Girsanov => (0..model.param_count())
            .map(|i| girsanov_replicate(model, theta, x0, i, config, stream))
            .collect(),
        EstimatorId::FiniteDifferenceCrn => (0..model.param_count())
            .map(|i| finite_difference_crn_replicate(model, theta, x0, i, config, stream))
            .collect(),
        other => Err(Error::EstimatorModelMismatch {
            estimator: other.as_str(),
            kind: "crn",
        }),
    }
}

/// Replicates of an SDE estimator, in replicate order.
pub fn sde_samples<S: Scalar, M: SdeModel<S> + ?Sized>(
    estimator: EstimatorId,
    model: &M,
    theta: &[S],
    x0: &[S],
    config: &EstimatorConfig<S>,
) -> Result<Vec<Vec<S>>> {
    config.validate()?;
    check_params(theta, model.param_count())?;
    collect_replicates(config.n_samples, config.seed, |stream| {
        sde_replicate(estimator, model, theta, x0, config, stream)
    })
}

/// Replicates of a reaction-network estimator, in replicate order.
pub fn crn_samples<S: Scalar, M: CrnModel<S> + ?Sized>(
    estimator: EstimatorId,
    model: &M,
    theta: &[S],
    x0: &[i64],
    config: &EstimatorConfig<S>,
) -> Result<Vec<Vec<S>>> {
    config.validate()?;
    check_params(theta, model.param_count())?;
    collect_replicates(config.n_samples, config.seed, |stream| {
        crn_replicate(estimator, model, theta, x0, config, stream)
    })
}

/// Mean and standard error of an SDE estimator over `config.n_samples` replicates.
pub fn estimate_sde<S: Scalar, M: SdeModel<S> + ?Sized>(
    estimator: EstimatorId,
    model: &M,
    theta: &[S],
    x0: &[S],
    config: &EstimatorConfig<S>,
) -> Result<GradientEstimate<S>> {
    let started = Instant::now();
    let samples = sde_samples(estimator, model, theta, x0, config)?;
    finish(&samples, started, estimator, config.seed)
}

/// Mean and standard error of a reaction-network estimator.
pub fn estimate_crn<S: Scalar, M: CrnModel<S> + ?Sized>(
    estimator: EstimatorId,
    model: &M,
    theta: &[S],
    x0: &[i64],
    config: &EstimatorConfig<S>,
) -> Result<GradientEstimate<S>> {
    let started = Instant::now();
    let samples = crn_samples(estimator, model, theta, x0, config)?;
    finish(&samples, started, estimator, config.seed)
}
