use super::{check_params, label, EstimatorConfig};
use crate::ctmc_engine::{simulate_coupled_pair, simulate_crn_path};
use crate::error::{check_len, Error, Result};
use crate::models::CrnModel;
use crate::rng::Stream;
use crate::scalar::Scalar;

/// An eIPA replicate with the number of auxiliary pairs it spawned.
#[derive(Debug, Clone, PartialEq)]
pub struct EipaReplicate<S> {
    pub gradient: Vec<S>,
    pub spawned_pairs: usize,
}

/// One eIPA-style replicate with uniform time randomization and Bernoulli
/// thinning; see [`eipa_replicate`].
pub fn eipa_replicate_detailed<S: Scalar, M: CrnModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    x0: &[i64],
    config: &EstimatorConfig<S>,
    stream: &Stream,
) -> Result<EipaReplicate<S>> {
    let (n, m) = (model.param_count(), model.reaction_count());
    check_params(theta, n)?;
    let beta = config.thinning_beta;
    if !(beta > S::zero() && beta <= S::one()) {
        return Err(Error::Config(format!("thinning_beta {beta} must lie in (0, 1]")));
    }
    let horizon = model.horizon();
    let path = simulate_crn_path(model, theta, x0, horizon, &stream.derive(label::MAIN))?;
    let tau = stream.derive(label::TIME).uniform::<S>() * horizon;
    let x_tau = path.state_at(tau).to_vec();

    let d_lambda: Vec<Vec<S>> = (0..n)
        .map(|i| {
            let v = model.propensity_param_derivative(&x_tau, theta, i);
            check_len("propensity parameter derivative", v.len(), m).map(|_| v)
        })
        .collect::<Result<_>>()?;

    let mut gradient = vec![S::zero(); n];
    let mut thinning = stream.derive(label::THINNING);
    let aux = stream.derive(label::AUX);
    let beta_f64 = beta.to_f64_lossy();
    let mut spawned_pairs = 0;
    for k in 0..m {
        if d_lambda.iter().all(|row| row[k] == S::zero()) {
            continue;
        }
        if !thinning.bernoulli(beta_f64) {
            continue;
        }
        spawned_pairs += 1;
        let pair = simulate_coupled_pair(model, theta, &x_tau, k, tau, &aux.derive(k as u64))?;
        let difference =
            (model.terminal_reward(pair.shifted.terminal()) - model.terminal_reward(pair.primary.terminal())) / beta;
        for (g, row) in gradient.iter_mut().zip(&d_lambda) {
            *g += horizon * row[k] * difference;
        }
    }
    Ok(EipaReplicate {
        gradient,
        spawned_pairs,
    })
}

/// One replicate of `T · Σ_k ∂θλ_k(X(τ)) · [g(X̃^{X(τ)+ζ_k}(T−τ)) − g(X̃^{X(τ)}(T−τ))] / β`
/// with `τ ~ U(0, T)` and each reaction's auxiliary pair spawned with
/// probability `β`.
pub fn eipa_replicate<S: Scalar, M: CrnModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    x0: &[i64],
    config: &EstimatorConfig<S>,
    stream: &Stream,
) -> Result<Vec<S>> {
    eipa_replicate_detailed(model, theta, x0, config, stream).map(|r| r.gradient)
}

/// Likelihood-ratio replicate `g(X(T)) · W_i` with the exact score
/// `W_i = Σ_jumps ∂θiλ/λ − ∫₀ᵀ Σ_k ∂θiλ_k(X(s)) ds`.
pub fn girsanov_replicate<S: Scalar, M: CrnModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    x0: &[i64],
    i: usize,
    _config: &EstimatorConfig<S>,
    stream: &Stream,
) -> Result<S> {
    let (n, m) = (model.param_count(), model.reaction_count());
    check_params(theta, n)?;
    if i >= n {
        return Err(Error::ParamIndex { index: i, count: n });
    }
    let horizon = model.horizon();
    let path = simulate_crn_path(model, theta, x0, horizon, &stream.derive(label::MAIN))?;
    let jumps = path.jump_count();
    let mut score = S::zero();
    let mut segment_start = S::zero();
    for j in 0..=jumps {
        let x = path.state(j);
        let lambda = model.propensities(x, theta);
        check_len("propensities", lambda.len(), m)?;
        let d_lambda = model.propensity_param_derivative(x, theta, i);
        check_len("propensity parameter derivative", d_lambda.len(), m)?;
        if let Some(k) = (0..m).find(|&k| lambda[k] == S::zero() && d_lambda[k] != S::zero()) {
            return Err(Error::ScoreUndefined { reaction: k });
        }
        let segment_end = if j < jumps { path.jump_times()[j] } else { horizon };
        let compensator: S = d_lambda.iter().copied().sum();
        score -= compensator * (segment_end - segment_start);
        if j < jumps {
            let k = path.reaction_ids()[j];
            score += d_lambda[k] / lambda[k];
        }
        segment_start = segment_end;
    }
    Ok(model.terminal_reward(path.terminal()) * score)
}

/// Central finite difference in `θ_i` with shared unit-rate reaction clocks.
pub fn finite_difference_crn_replicate<S: Scalar, M: CrnModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    x0: &[i64],
    i: usize,
    config: &EstimatorConfig<S>,
    stream: &Stream,
) -> Result<S> {
    let n = model.param_count();
    check_params(theta, n)?;
    if i >= n {
        return Err(Error::ParamIndex { index: i, count: n });
    }
    let h = config.fd_step;
    if !(h > S::zero()) {
        return Err(Error::Config(format!("fd_step {h} must be positive")));
    }
    let horizon = model.horizon();
    let clocks = stream.derive(label::MAIN);
    let mut plus = theta.to_vec();
    plus[i] += h;
    let mut minus = theta.to_vec();
    minus[i] -= h;
    let up = simulate_crn_path(model, &plus, x0, horizon, &clocks)?;
    let down = simulate_crn_path(model, &minus, x0, horizon, &clocks)?;
    Ok((model.terminal_reward(up.terminal()) - model.terminal_reward(down.terminal())) / (h + h))
}
