//! Monte Carlo parameter sensitivities for Itô SDEs and reaction networks.
//!
//! The core is generic over the scalar type (`f32` or `f64`); the aliases at
//! the bottom of this file fix it to `f64` or `f32`.
//!
//! ```
//! use gengrad::{estimate_sde, EstimatorConfig, EstimatorId, OrnsteinUhlenbeck, SdeReward};
//!
//! let ou = OrnsteinUhlenbeck { horizon: 1.0, reward: SdeReward::QUADRATIC };
//! let config = EstimatorConfig { n_samples: 200, steps_main: 64, seed: 1, ..Default::default() };
//! let est = estimate_sde(EstimatorId::GeneratorGradient, &ou, &[1.0, 0.5], &[1.0], &config).unwrap();
//! assert_eq!(est.mean.len(), 2);
//! ```

pub mod ctmc_engine;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod linalg;
pub mod models;
pub mod oracle;
pub mod rng;
pub mod scalar;
pub mod sde_engine;
pub mod stats;

pub use ctmc_engine::{simulate_coupled_pair, simulate_crn_path, simulate_split_coupled, CoupledPairPath, CrnPath};
pub use error::{Error, ErrorCategory, Result};
pub use estimators::{
    estimate_crn, estimate_sde, EstimatorConfig, EstimatorId, GradientEstimate, TimeRandomization,
};
pub use harness::{run_experiment, scaling_benchmark, ExperimentConfig, ExperimentReport};
pub use models::{
    builtin_model, BuiltinModel, BuiltinOptions, CrnModel, CrnReward, DriftedBrownianMotion, FeatureDrift,
    GeometricBrownianMotion, MassActionNetwork, OrnsteinUhlenbeck, ParamVector, Reaction, SdeModel, SdeReward,
};
pub use oracle::{
    check_adjoint_identity, solve_feynman_kac_1d, solve_fokker_planck_1d, solve_master_equation_value_and_gradient,
    AdjointReport, SpaceTimeGrid,
};
pub use rng::Stream;
pub use scalar::Scalar;
pub use sde_engine::{estimate_value_derivatives_at, simulate_sde_path, SdePath, TimeGrid};
pub use stats::aggregate_statistics;

pub type SdeModelF64 = dyn SdeModel<f64> + Send + Sync;
pub type CrnModelF64 = dyn CrnModel<f64> + Send + Sync;
pub type EstimatorConfigF64 = EstimatorConfig<f64>;
pub type GradientEstimateF64 = GradientEstimate<f64>;
pub type SpaceTimeGridF64 = SpaceTimeGrid<f64>;

pub type SdeModelF32 = dyn SdeModel<f32> + Send + Sync;
pub type CrnModelF32 = dyn CrnModel<f32> + Send + Sync;
pub type EstimatorConfigF32 = EstimatorConfig<f32>;
pub type GradientEstimateF32 = GradientEstimate<f32>;
