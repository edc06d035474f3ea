use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A stochastic reaction network: `d` species, `m` reactions with
/// stoichiometric vectors `ζ_k` and time-homogeneous propensities
/// `λ_{θ,k}(x)`, observed through a θ-free terminal reward `g` at `T`.
///
/// Implementors must keep propensities admissible: `λ_k(x) = 0` whenever
/// `x + ζ_k` leaves the nonnegative orthant. Simulators rely on this and do
/// not guard against it.
pub trait CrnModel<S: Scalar>: Send + Sync {
    fn species_count(&self) -> usize;
    fn reaction_count(&self) -> usize;
    fn param_count(&self) -> usize;
    fn horizon(&self) -> S;

    /// Stoichiometric vector `ζ_k`.
    fn stoichiometry(&self, k: usize) -> &[i64];
    fn propensities(&self, x: &[i64], theta: &[S]) -> Vec<S>;
    fn propensity_param_derivative(&self, x: &[i64], theta: &[S], i: usize) -> Vec<S>;
    fn terminal_reward(&self, x: &[i64]) -> S;
}

/// Terminal reward of a reaction network, read off one species.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrnReward {
    /// `g(x) = x_s`
    Linear { species: usize },
    /// `g(x) = x_s²`
    Quadratic { species: usize },
}

impl CrnReward {
    pub fn eval<S: Scalar>(&self, x: &[i64]) -> S {
        match *self {
            CrnReward::Linear { species } => S::of(x[species] as f64),
            CrnReward::Quadratic { species } => {
                let v = S::of(x[species] as f64);
                v * v
            }
        }
    }

    fn species(&self) -> usize {
        match *self {
            CrnReward::Linear { species } | CrnReward::Quadratic { species } => species,
        }
    }
}

/// One mass-action reaction with rate constant `θ[rate_param]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reaction {
    pub reactants: Vec<u32>,
    pub products: Vec<u32>,
    pub rate_param: usize,
}

impl Reaction {
    pub fn new(reactants: &[u32], products: &[u32], rate_param: usize) -> Self {
        Self {
            reactants: reactants.to_vec(),
            products: products.to_vec(),
            rate_param,
        }
    }
}

/// Mass-action network: `λ_k(x) = θ[p_k] · Π_s x_s (x_s − 1) ⋯ (x_s − r_{ks} + 1)`.
///
/// The falling-factorial form vanishes whenever a reactant count is too small,
/// so admissibility holds by construction.
#[derive(Debug, Clone)]
pub struct MassActionNetwork<S> {
    species: usize,
    params: usize,
    horizon: S,
    reward: CrnReward,
    reactions: Vec<Reaction>,
    zeta: Vec<Vec<i64>>,
}

impl<S: Scalar> MassActionNetwork<S> {
    pub fn new(species: usize, params: usize, horizon: S, reward: CrnReward) -> Result<Self> {
        if species == 0 || params == 0 {
            return Err(Error::ModelContract("network needs at least one species and one parameter".into()));
        }
        if !(horizon > S::zero()) || !horizon.is_finite() {
            return Err(Error::ModelContract("horizon must be positive and finite".into()));
        }
        if reward.species() >= species {
            return Err(Error::ModelContract(format!(
                "reward reads species {} of {species}",
                reward.species()
            )));
        }
        Ok(Self {
            species,
            params,
            horizon,
            reward,
            reactions: Vec::new(),
            zeta: Vec::new(),
        })
    }

    pub fn with_reaction(mut self, reaction: Reaction) -> Result<Self> {
        let k = self.reactions.len();
        if reaction.reactants.len() != self.species || reaction.products.len() != self.species {
            return Err(Error::ModelContract(format!(
                "reaction {k} lists {} reactants / {} products for {} species",
                reaction.reactants.len(),
                reaction.products.len(),
                self.species
            )));
        }
        if reaction.rate_param >= self.params {
            return Err(Error::ParamIndex {
                index: reaction.rate_param,
                count: self.params,
            });
        }
        let zeta: Vec<i64> = reaction
            .products
            .iter()
            .zip(&reaction.reactants)
            .map(|(&p, &r)| p as i64 - r as i64)
            .collect();
        if zeta.iter().all(|&z| z == 0) {
            return Err(Error::ModelContract(format!("reaction {k} has zero net stoichiometry")));
        }
        self.reactions.push(reaction);
        self.zeta.push(zeta);
        Ok(self)
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    fn mass_action_factor(reaction: &Reaction, x: &[i64]) -> S {
        let mut factor = 1.0_f64;
        for (&count, &r) in x.iter().zip(&reaction.reactants) {
            for j in 0..r as i64 {
                factor *= (count - j).max(0) as f64;
            }
        }
        S::of(factor)
    }
}

impl<S: Scalar> CrnModel<S> for MassActionNetwork<S> {
    fn species_count(&self) -> usize {
        self.species
    }

    fn reaction_count(&self) -> usize {
        self.reactions.len()
    }

    fn param_count(&self) -> usize {
        self.params
    }

    fn horizon(&self) -> S {
        self.horizon
    }

    fn stoichiometry(&self, k: usize) -> &[i64] {
        &self.zeta[k]
    }

    fn propensities(&self, x: &[i64], theta: &[S]) -> Vec<S> {
        self.reactions
            .iter()
            .map(|r| theta[r.rate_param] * Self::mass_action_factor(r, x))
            .collect()
    }

    fn propensity_param_derivative(&self, x: &[i64], _theta: &[S], i: usize) -> Vec<S> {
        self.reactions
            .iter()
            .map(|r| {
                if r.rate_param == i {
                    Self::mass_action_factor(r, x)
                } else {
                    S::zero()
                }
            })
            .collect()
    }

    fn terminal_reward(&self, x: &[i64]) -> S {
        self.reward.eval(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimerisation_propensity_uses_falling_factorial() {
        let net = MassActionNetwork::<f64>::new(2, 1, 1.0, CrnReward::Linear { species: 1 })
            .unwrap()
            .with_reaction(Reaction::new(&[2, 0], &[0, 1], 0))
            .unwrap();
        assert_eq!(net.propensities(&[5, 0], &[0.5]), vec![0.5 * 20.0]);
        assert_eq!(net.propensities(&[1, 0], &[0.5]), vec![0.0]);
        assert_eq!(net.stoichiometry(0), &[-2, 1]);
    }

    #[test]
    fn rejects_null_reaction() {
        let err = MassActionNetwork::<f64>::new(1, 1, 1.0, CrnReward::Linear { species: 0 })
            .unwrap()
            .with_reaction(Reaction::new(&[1], &[1], 0));
        assert!(err.is_err());
    }
}
