//! Model abstractions for parameterized SDEs and reaction networks.
//!
//! Models supply analytic derivatives explicitly. The finite-difference
//! consistency tests in this module are the contract that keeps them honest.

mod crn;
mod library;
mod sde;
mod validate;

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use crn::{CrnModel, CrnReward, MassActionNetwork, Reaction};
pub use library::{
    builtin_model, default_parameters, BuiltinModel, BuiltinOptions, DriftedBrownianMotion,
    FeatureDrift, GeometricBrownianMotion, OrnsteinUhlenbeck, RunningReward, SdeReward,
    TerminalReward, BUILTIN_IDS,
};
pub use sde::{
    diffusion_matrix, diffusion_matrix_from_sigma, diffusion_matrix_param_derivative,
    diffusion_matrix_param_derivative_from, SdeModel,
};
pub use validate::{validate_crn_model, validate_sde_model, ProbePoint, ValidationReport};

/// Parameter vector θ. Non-empty with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector<S>(Vec<S>);

impl<S: Scalar> ParamVector<S> {
    pub fn new(values: Vec<S>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("parameter vector must be non-empty".into()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("parameter {pos} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Copy with entry `index` shifted by `delta`.
    pub fn bumped(&self, index: usize, delta: S) -> Self {
        let mut values = self.0.clone();
        values[index] += delta;
        Self(values)
    }

    pub fn into_inner(self) -> Vec<S> {
        self.0
    }
}

impl<S> Deref for ParamVector<S> {
    type Target = [S];

    fn deref(&self) -> &[S] {
        &self.0
    }
}
