//! Built-in analytic test models, addressed by string id.

use super::crn::{CrnModel, CrnReward, MassActionNetwork, Reaction};
use super::sde::SdeModel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const BUILTIN_IDS: [&str; 7] = [
    "drifted-bm",
    "ou",
    "gbm",
    "feature-drift",
    "pure-birth",
    "birth-death",
    "gene-expression",
];

/// θ-free terminal reward `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalReward {
    /// `g(x) = Σ_a x_a`
    Linear,
    /// `g(x) = Σ_a x_a²`
    Quadratic,
}

/// θ-free running reward `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunningReward {
    None,
    /// `ρ(t, x) = Σ_a x_a²`
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SdeReward {
    pub terminal: TerminalReward,
    pub running: RunningReward,
}

impl SdeReward {
    pub const LINEAR: SdeReward = SdeReward {
        terminal: TerminalReward::Linear,
        running: RunningReward::None,
    };
    pub const QUADRATIC: SdeReward = SdeReward {
        terminal: TerminalReward::Quadratic,
        running: RunningReward::None,
    };

    fn g<S: Scalar>(&self, x: &[S]) -> S {
        match self.terminal {
            TerminalReward::Linear => x.iter().copied().sum(),
            TerminalReward::Quadratic => x.iter().map(|v| *v * *v).sum(),
        }
    }

    fn grad_g<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        match self.terminal {
            TerminalReward::Linear => vec![S::one(); x.len()],
            TerminalReward::Quadratic => x.iter().map(|v| S::of(2.0) * *v).collect(),
        }
    }

    fn hess_g<S: Scalar>(&self, d: usize) -> Vec<S> {
        let mut h = vec![S::zero(); d * d];
        if self.terminal == TerminalReward::Quadratic {
            for a in 0..d {
                h[a * d + a] = S::of(2.0);
            }
        }
        h
    }

    fn rho<S: Scalar>(&self, x: &[S]) -> S {
        match self.running {
            RunningReward::None => S::zero(),
            RunningReward::Quadratic => x.iter().map(|v| *v * *v).sum(),
        }
    }

    fn grad_rho<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        match self.running {
            RunningReward::None => vec![S::zero(); x.len()],
            RunningReward::Quadratic => x.iter().map(|v| S::of(2.0) * *v).collect(),
        }
    }

    fn hess_rho<S: Scalar>(&self, d: usize) -> Vec<S> {
        let mut h = vec![S::zero(); d * d];
        if self.running == RunningReward::Quadratic {
            for a in 0..d {
                h[a * d + a] = S::of(2.0);
            }
        }
        h
    }
}

/// Reward plumbing shared by the scalar built-ins.
macro_rules! reward_methods {
    () => {
        fn terminal_reward(&self, x: &[S], _theta: &[S]) -> S {
            self.reward.g(x)
        }
        fn terminal_reward_gradient(&self, x: &[S], _theta: &[S]) -> Vec<S> {
            self.reward.grad_g(x)
        }
        fn terminal_reward_hessian(&self, x: &[S], _theta: &[S]) -> Vec<S> {
            self.reward.hess_g(x.len())
        }
        fn has_reward_rate(&self) -> bool {
            self.reward.running != RunningReward::None
        }
        fn reward_rate(&self, _t: S, x: &[S], _theta: &[S]) -> S {
            self.reward.rho(x)
        }
        fn reward_rate_gradient(&self, _t: S, x: &[S], _theta: &[S]) -> Vec<S> {
            self.reward.grad_rho(x)
        }
        fn reward_rate_hessian(&self, _t: S, x: &[S], _theta: &[S]) -> Vec<S> {
            self.reward.hess_rho(x.len())
        }
    };
}

/// `dX = θ dt + dB`.
#[derive(Debug, Clone)]
pub struct DriftedBrownianMotion<S> {
    pub horizon: S,
    pub reward: SdeReward,
}

impl<S: Scalar> SdeModel<S> for DriftedBrownianMotion<S> {
    fn state_dim(&self) -> usize {
        1
    }
    fn noise_dim(&self) -> usize {
        1
    }
    fn param_count(&self) -> usize {
        1
    }
    fn horizon(&self) -> S {
        self.horizon
    }
    fn drift(&self, _t: S, _x: &[S], theta: &[S]) -> Vec<S> {
        vec![theta[0]]
    }
    fn diffusion(&self, _t: S, _x: &[S], _theta: &[S]) -> Vec<S> {
        vec![S::one()]
    }
    fn drift_param_derivative(&self, _t: S, _x: &[S], _theta: &[S], _i: usize) -> Vec<S> {
        vec![S::one()]
    }
    fn diffusion_param_derivative(&self, _t: S, _x: &[S], _theta: &[S], _i: usize) -> Vec<S> {
        vec![S::zero()]
    }
    fn drift_jacobian(&self, _t: S, _x: &[S], _theta: &[S]) -> Vec<S> {
        vec![S::zero()]
    }
    fn diffusion_jacobian(&self, _t: S, _x: &[S], _theta: &[S]) -> Vec<S> {
        vec![S::zero()]
    }
    fn drift_hessian(&self, _t: S, _x: &[S], _theta: &[S]) -> Vec<S> {
        vec![S::zero()]
    }
    fn diffusion_hessian(&self, _t: S, _x: &[S], _theta: &[S]) -> Vec<S> {
        vec![S::zero()]
    }
    reward_methods!();
}

/// `dX = −θ1 X dt + θ2 dB`.
#[derive(Debug, Clone)]
pub struct OrnsteinUhlenbeck<S> {
    pub horizon: S,
    pub reward: SdeReward,
}

impl<S: Scalar> SdeModel<S> for OrnsteinUhlenbeck<S> {
    fn state_dim(&self) -> usize {
        1
    }
    fn noise_dim(&self) -> usize {
        1
    }
    fn param_count(&self) -> usize {
        2
    }
    fn horizon(&self) -> S {
        self.horizon
    }
    fn drift(&self, _t: S, x: &[S], theta: &[S]) -> Vec<S> {
        vec![-theta[0] * x[0]]
    }
    fn diffusion(&self, _t: S, _x: &[S], theta: &[S]) -> Vec<S> {
        vec![theta[1]]
    }
    fn drift_param_derivative(&self, _t: S, x: &[S], _theta: &[S], i: usize) -> Vec<S> {
        vec![if i == 0 { -x[0] } else { S::zero() }]
    }
    fn diffusion_param_derivative(&self, _t: S, _x: &[S], _theta: &[S], i: usize) -> Vec<S> {
        vec![if i == 1 { S::one() } else { S::zero() }]
    }
    fn drift_jacobian(&self, _t: S, _x: &[S], theta: &[S]) -> Vec<S> {
        vec![-theta[0]]
    }
    fn diffusion_jacobian(&self, _t: S, _x: &[S], _theta: &[S]) -> Vec<S> {
        vec![S::zero()]
    }
    fn drift_hessian(&self, _t: S, _x: &[S], _theta: &[S]) -> Vec<S> {
        vec![S::zero()]
    }
    fn diffusion_hessian(&self, _t: S, _x: &[S], _theta: &[S]) -> Vec<S> {
        vec![S::zero()]
    }
    reward_methods!();
}

/// `dX = θ1 X dt + θ2 X dB`.
#[derive(Debug, Clone)]
pub struct GeometricBrownianMotion<S> {
    pub horizon: S,
    pub reward: SdeReward,
}

impl<S: Scalar> SdeModel<S> for GeometricBrownianMotion<S> {
    fn state_dim(&self) -> usize {
        1
    }
    fn noise_dim(&self) -> usize {
        1
    }
    fn param_count(&self) -> usize {
        2
    }
    fn horizon(&self) -> S {
        self.horizon
    }
    fn drift(&self, _t: S, x: &[S], theta: &[S]) -> Vec<S> {
        vec![theta[0] * x[0]]
    }
    fn diffusion(&self, _t: S, x: &[S], theta: &[S]) -> Vec<S> {
        vec![theta[1] * x[0]]
    }
    fn drift_param_derivative(&self, _t: S, x: &[S], _theta: &[S], i: usize) -> Vec<S> {
        vec![if i == 0 { x[0] } else { S::zero() }]
    }
    fn diffusion_param_derivative(&self, _t: S, x: &[S], _theta: &[S], i: usize) -> Vec<S> {
        vec![if i == 1 { x[0] } else { S::zero() }]
    }
    fn drift_jacobian(&self, _t: S, _x: &[S], theta: &[S]) -> Vec<S> {
        vec![theta[0]]
    }
    fn diffusion_jacobian(&self, _t: S, _x: &[S], theta: &[S]) -> Vec<S> {
        vec![theta[1]]
    }
    fn drift_hessian(&self, _t: S, _x: &[S], _theta: &[S]) -> Vec<S> {
        vec![S::zero()]
    }
    fn diffusion_hessian(&self, _t: S, _x: &[S], _theta: &[S]) -> Vec<S> {
        vec![S::zero()]
    }
    reward_methods!();
}

const FEATURE_CENTERS: [f64; 4] = [-1.5, -0.5, 0.5, 1.5];
const FEATURE_VOLATILITY: f64 = 0.5;

/// Overparameterized scalar drift for scaling studies:
/// `dX = (−X + Σᵢ θᵢ φᵢ(X)) dt + 0.5 dB` with `n` bounded smooth features
/// `φᵢ(x) = sᵢ · tanh(x − c_{i mod 4})`, `sᵢ = 1 / (1 + ⌊i/4⌋)`.
///
/// Features share four basis bumps, so evaluating the drift costs one
/// multiply-add per parameter on top of one `exp` and four divisions.
#[derive(Debug, Clone)]
pub struct FeatureDrift<S> {
    pub horizon: S,
    pub reward: SdeReward,
    scales: Vec<S>,
}

impl<S: Scalar> FeatureDrift<S> {
    pub fn new(n_features: usize, horizon: S, reward: SdeReward) -> Self {
        let scales = (0..n_features)
            .map(|i| S::one() / (S::one() + S::of_usize(i / FEATURE_CENTERS.len())))
            .collect();
        Self { horizon, reward, scales }
    }

    /// `tanh(x − c_b)` for each basis bump, from a single `exp(2x)`.
    fn basis(x: S) -> [S; 4] {
        if x.abs() > S::of(8.0) {
            return FEATURE_CENTERS.map(|c| (x - S::of(c)).tanh());
        }
        let e = (S::of(2.0) * x).exp();
        FEATURE_CENTERS.map(|c| {
            let z = e * S::of((-2.0 * c).exp());
            (z - S::one()) / (z + S::one())
        })
    }

    /// Per-bump coefficients `Σ_{i ≡ b} θᵢ sᵢ`.
    fn coefficients(&self, theta: &[S]) -> [S; 4] {
        let mut coef = [S::zero(); 4];
        let (th_chunks, s_chunks) = (theta.chunks_exact(4), self.scales.chunks_exact(4));
        let (th_rest, s_rest) = (th_chunks.remainder(), s_chunks.remainder());
        for (th, s) in th_chunks.zip(s_chunks) {
            for b in 0..4 {
                coef[b] += th[b] * s[b];
            }
        }
        for (b, (&th, &s)) in th_rest.iter().zip(s_rest).enumerate() {
            coef[b] += th * s;
        }
        coef
    }
}

impl<S: Scalar> SdeModel<S> for FeatureDrift<S> {
    fn state_dim(&self) -> usize {
        1
    }
    fn noise_dim(&self) -> usize {
        1
    }
    fn param_count(&self) -> usize {
        self.scales.len()
    }
    fn horizon(&self) -> S {
        self.horizon
    }
    fn drift(&self, _t: S, x: &[S], theta: &[S]) -> Vec<S> {
        let basis = Self::basis(x[0]);
        let coef = self.coefficients(theta);
        let mut mu = -x[0];
        for b in 0..4 {
            mu += coef[b] * basis[b];
        }
        vec![mu]
    }
    fn diffusion(&self, _t: S, _x: &[S], _theta: &[S]) -> Vec<S> {
        vec![S::of(FEATURE_VOLATILITY)]
    }
    fn drift_param_derivative(&self, _t: S, x: &[S], _theta: &[S], i: usize) -> Vec<S> {
        vec![self.scales[i] * (x[0] - S::of(FEATURE_CENTERS[i % 4])).tanh()]
    }
    fn diffusion_param_derivative(&self, _t: S, _x: &[S], _theta: &[S], _i: usize) -> Vec<S> {
        vec![S::zero()]
    }
    fn drift_jacobian(&self, _t: S, x: &[S], theta: &[S]) -> Vec<S> {
        let basis = Self::basis(x[0]);
        let coef = self.coefficients(theta);
        let mut jac = -S::one();
        for b in 0..4 {
            jac += coef[b] * (S::one() - basis[b] * basis[b]);
        }
        vec![jac]
    }
    fn diffusion_jacobian(&self, _t: S, _x: &[S], _theta: &[S]) -> Vec<S> {
        vec![S::zero()]
    }
    fn drift_hessian(&self, _t: S, x: &[S], theta: &[S]) -> Vec<S> {
        let basis = Self::basis(x[0]);
        let coef = self.coefficients(theta);
        let mut hess = S::zero();
        for b in 0..4 {
            let th = basis[b];
            hess += coef[b] * (-S::of(2.0) * th * (S::one() - th * th));
        }
        vec![hess]
    }
    fn diffusion_hessian(&self, _t: S, _x: &[S], _theta: &[S]) -> Vec<S> {
        vec![S::zero()]
    }
    reward_methods!();
}

/// A built-in model of either kind.
pub enum BuiltinModel<S: Scalar> {
    Sde(Box<dyn SdeModel<S>>),
    Crn(Box<dyn CrnModel<S>>),
}

impl<S: Scalar> BuiltinModel<S> {
    pub fn kind(&self) -> &'static str {
        match self {
            BuiltinModel::Sde(_) => "sde",
            BuiltinModel::Crn(_) => "crn",
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            BuiltinModel::Sde(m) => m.param_count(),
            BuiltinModel::Crn(m) => m.param_count(),
        }
    }

    pub fn state_dim(&self) -> usize {
        match self {
            BuiltinModel::Sde(m) => m.state_dim(),
            BuiltinModel::Crn(m) => m.species_count(),
        }
    }
}

/// Overrides for [`builtin_model`]; `None` keeps the catalog default.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BuiltinOptions<S> {
    pub n_features: Option<usize>,
    pub horizon: Option<S>,
    pub sde_reward: Option<SdeReward>,
    pub crn_reward: Option<CrnReward>,
}

/// Builds a catalog model by id.
///
/// | id                | kind | d | n  | dynamics                                   | default g |
/// |-------------------|------|---|----|--------------------------------------------|-----------|
/// | `drifted-bm`      | SDE  | 1 | 1  | `dX = θ dt + dB`                           | `x`       |
/// | `ou`              | SDE  | 1 | 2  | `dX = −θ1 X dt + θ2 dB`                    | `x²`      |
/// | `gbm`             | SDE  | 1 | 2  | `dX = θ1 X dt + θ2 X dB`                   | `x`       |
/// | `feature-drift`   | SDE  | 1 | n  | see [`FeatureDrift`]                       | `x²`      |
/// | `pure-birth`      | CRN  | 1 | 1  | `∅ → S` at `θ`                             | `x`       |
/// | `birth-death`     | CRN  | 1 | 2  | `∅ → S` at `θ1`, `S → ∅` at `θ2 x`         | `x`       |
/// | `gene-expression` | CRN  | 2 | 4  | `∅→M`, `M→∅`, `M→M+P`, `P→∅`               | `x_P`     |
///
/// The default horizon is 1.
pub fn builtin_model<S: Scalar>(id: &str, options: &BuiltinOptions<S>) -> Result<BuiltinModel<S>> {
    let horizon = options.horizon.unwrap_or_else(S::one);
    if !(horizon > S::zero()) || !horizon.is_finite() {
        return Err(Error::Config(format!("horizon {horizon} must be positive")));
    }
    if options.n_features.is_some() && id != "feature-drift" {
        return Err(Error::Config(format!("model `{id}` does not take a feature count")));
    }
    let sde = |default: SdeReward| options.sde_reward.unwrap_or(default);
    let crn = |default: CrnReward| options.crn_reward.unwrap_or(default);
    let model = match id {
        "drifted-bm" => BuiltinModel::Sde(Box::new(DriftedBrownianMotion {
            horizon,
            reward: sde(SdeReward::LINEAR),
        })),
        "ou" => BuiltinModel::Sde(Box::new(OrnsteinUhlenbeck {
            horizon,
            reward: sde(SdeReward::QUADRATIC),
        })),
        "gbm" => BuiltinModel::Sde(Box::new(GeometricBrownianMotion {
            horizon,
            reward: sde(SdeReward::LINEAR),
        })),
        "feature-drift" => {
            let n = options.n_features.unwrap_or(8);
            if n == 0 {
                return Err(Error::Config("feature-drift needs at least one feature".into()));
            }
            BuiltinModel::Sde(Box::new(FeatureDrift::new(n, horizon, sde(SdeReward::QUADRATIC))))
        }
        "pure-birth" => BuiltinModel::Crn(Box::new(
            MassActionNetwork::new(1, 1, horizon, crn(CrnReward::Linear { species: 0 }))?
                .with_reaction(Reaction::new(&[0], &[1], 0))?,
        )),
        "birth-death" => BuiltinModel::Crn(Box::new(
            MassActionNetwork::new(1, 2, horizon, crn(CrnReward::Linear { species: 0 }))?
                .with_reaction(Reaction::new(&[0], &[1], 0))?
                .with_reaction(Reaction::new(&[1], &[0], 1))?,
        )),
        "gene-expression" => BuiltinModel::Crn(Box::new(
            MassActionNetwork::new(2, 4, horizon, crn(CrnReward::Linear { species: 1 }))?
                .with_reaction(Reaction::new(&[0, 0], &[1, 0], 0))?
                .with_reaction(Reaction::new(&[1, 0], &[0, 0], 1))?
                .with_reaction(Reaction::new(&[1, 0], &[1, 1], 2))?
                .with_reaction(Reaction::new(&[0, 1], &[0, 0], 3))?,
        )),
        other => return Err(Error::UnknownModel(other.to_string())),
    };
    if options.crn_reward.is_some() && matches!(model, BuiltinModel::Sde(_)) {
        return Err(Error::Config(format!("model `{id}` is an SDE; CRN reward not applicable")));
    }
    if options.sde_reward.is_some() && matches!(model, BuiltinModel::Crn(_)) {
        return Err(Error::Config(format!("model `{id}` is a reaction network; SDE reward not applicable")));
    }
    Ok(model)
}

/// Catalog default `(θ, x0)` for a built-in id.
pub fn default_parameters(id: &str, n_features: Option<usize>) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok(match id {
        "drifted-bm" => (vec![0.5], vec![0.0]),
        "ou" => (vec![1.0, 0.5], vec![1.0]),
        "gbm" => (vec![0.1, 0.2], vec![1.0]),
        "feature-drift" => (vec![0.1; n_features.unwrap_or(8)], vec![0.5]),
        "pure-birth" => (vec![2.0], vec![0.0]),
        "birth-death" => (vec![10.0, 1.0], vec![0.0]),
        "gene-expression" => (vec![2.0, 0.5, 5.0, 0.2], vec![0.0, 0.0]),
        other => return Err(Error::UnknownModel(other.to_string())),
    })
}
