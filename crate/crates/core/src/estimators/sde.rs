use super::{check_params, label, EstimatorConfig};
use crate::error::{check_len, Error, Result};
use crate::models::{diffusion_matrix_param_derivative_from, SdeModel};
use crate::rng::Stream;
use crate::scalar::{all_finite, Scalar};
use crate::sde_engine::{
    estimate_value_derivatives_at, path_objective, simulate_sde_path, simulate_sde_path_with_increments, TimeGrid,
};

fn main_grid<S: Scalar, M: SdeModel<S> + ?Sized>(model: &M, config: &EstimatorConfig<S>) -> Result<TimeGrid<S>> {
    TimeGrid::new(S::zero(), model.horizon(), config.steps_main)
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// One replicate of the generator gradient estimator.
///
/// The `∂θL v` time integral is randomized at a single uniform time snapped
/// to the preceding grid node `k`. The parameter derivatives of the
/// coefficients are taken at `(t_k, X_k)` and `∇v`, `∇²v` at the next node
/// `(t_{k+1}, X_{k+1})`, estimated once from independent auxiliary paths and
/// reused for every parameter. With the default auxiliary grid (the rest of
/// the main grid) this is unbiased for the Euler chain itself. The `∂θρ`
/// integral is taken by path quadrature.
pub fn generator_gradient_replicate<S: Scalar, M: SdeModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    x0: &[S],
    config: &EstimatorConfig<S>,
    stream: &Stream,
) -> Result<Vec<S>> {
    let n = model.param_count();
    check_params(theta, n)?;
    let (d, w) = (model.state_dim(), model.noise_dim());
    let horizon = model.horizon();
    let grid = main_grid(model, config)?;
    let path = simulate_sde_path(model, theta, x0, grid, &mut stream.derive(label::MAIN))?;

    let tau = stream.derive(label::TIME).uniform::<S>() * horizon;
    let node = grid.node_at_or_before(tau);
    let (t_eval, x_eval) = (grid.time(node), path.state(node));
    let remaining = grid.steps() - node - 1;
    let steps_aux = if remaining == 0 { 0 } else { config.steps_aux.unwrap_or(remaining) };
    let derivs = estimate_value_derivatives_at(
        model,
        theta,
        grid.time(node + 1),
        path.state(node + 1),
        config.n_aux,
        steps_aux,
        &stream.derive(label::AUX),
    )?;

    let sigma = model.diffusion(t_eval, x_eval, theta);
    check_len("diffusion", sigma.len(), d * w)?;
    let terminal = path.terminal();
    let mut gradient = Vec::with_capacity(n);
    for i in 0..n {
        let d_mu = model.drift_param_derivative(t_eval, x_eval, theta, i);
        check_len("drift parameter derivative", d_mu.len(), d)?;
        let d_sigma = model.diffusion_param_derivative(t_eval, x_eval, theta, i);
        check_len("diffusion parameter derivative", d_sigma.len(), d * w)?;
        let d_a = diffusion_matrix_param_derivative_from(&sigma, &d_sigma, d, w);
        // Tr(∇²v ∂θa) with both matrices symmetric
        let trace = dot(&derivs.hess, &d_a);
        let generator_term = horizon * (dot(&derivs.grad, &d_mu) + trace);
        gradient.push(generator_term + model.terminal_reward_param_derivative(terminal, theta, i));
    }

    if model.has_reward_rate() {
        let dt = grid.dt();
        for k in 0..grid.steps() {
            let t = grid.time(k);
            let x = path.state(k);
            for (i, g) in gradient.iter_mut().enumerate() {
                *g += model.reward_rate_param_derivative(t, x, theta, i) * dt;
            }
        }
    }
    Ok(gradient)
}

/// One replicate of the forward (pathwise) sensitivity baseline.
///
/// Propagates `Y_i = ∂X/∂θ_i` for every parameter alongside the Euler path,
/// so its cost per replicate grows linearly with the parameter count.
pub fn pathwise_forward_replicate<S: Scalar, M: SdeModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    x0: &[S],
    config: &EstimatorConfig<S>,
    stream: &Stream,
) -> Result<Vec<S>> {
    let n = model.param_count();
    check_params(theta, n)?;
    let (d, w) = (model.state_dim(), model.noise_dim());
    check_len("initial state", x0.len(), d)?;
    let grid = main_grid(model, config)?;
    let dt = grid.dt();
    let sqrt_dt = dt.sqrt();
    let with_rate = model.has_reward_rate();
    let mut main_stream = stream.derive(label::MAIN);

    let mut x = x0.to_vec();
    let mut sens = vec![S::zero(); n * d];
    let mut next = vec![S::zero(); d];
    let mut db = vec![S::zero(); w];
    let mut gradient = vec![S::zero(); n];

    for k in 0..grid.steps() {
        let t = grid.time(k);
        let mu = model.drift(t, &x, theta);
        check_len("drift", mu.len(), d)?;
        let sigma = model.diffusion(t, &x, theta);
        check_len("diffusion", sigma.len(), d * w)?;
        let mu_x = model.drift_jacobian(t, &x, theta);
        check_len("drift jacobian", mu_x.len(), d * d)?;
        let sigma_x = model.diffusion_jacobian(t, &x, theta);
        check_len("diffusion jacobian", sigma_x.len(), d * w * d)?;
        for v in db.iter_mut() {
            *v = main_stream.normal::<S>() * sqrt_dt;
        }
        let rho_x = if with_rate {
            let g = model.reward_rate_gradient(t, &x, theta);
            check_len("reward rate gradient", g.len(), d)?;
            g
        } else {
            Vec::new()
        };

        for i in 0..n {
            let y = &mut sens[i * d..(i + 1) * d];
            if with_rate {
                gradient[i] += (dot(&rho_x, y) + model.reward_rate_param_derivative(t, &x, theta, i)) * dt;
            }
            let d_mu = model.drift_param_derivative(t, &x, theta, i);
            check_len("drift parameter derivative", d_mu.len(), d)?;
            let d_sigma = model.diffusion_param_derivative(t, &x, theta, i);
            check_len("diffusion parameter derivative", d_sigma.len(), d * w)?;
            for a in 0..d {
                let mut v = y[a] + dt * (dot(&mu_x[a * d..(a + 1) * d], y) + d_mu[a]);
                for j in 0..w {
                    let row = (a * w + j) * d;
                    v += db[j] * (dot(&sigma_x[row..row + d], y) + d_sigma[a * w + j]);
                }
                next[a] = v;
            }
            y.copy_from_slice(&next);
        }

        for a in 0..d {
            let noise: S = (0..w).map(|j| sigma[a * w + j] * db[j]).sum();
            x[a] += mu[a] * dt + noise;
        }
        if !all_finite(&x) || !all_finite(&sens) {
            return Err(Error::Divergence { step: k + 1 });
        }
    }

    let g_x = model.terminal_reward_gradient(&x, theta);
    check_len("terminal reward gradient", g_x.len(), d)?;
    for (i, g) in gradient.iter_mut().enumerate() {
        *g += dot(&g_x, &sens[i * d..(i + 1) * d]) + model.terminal_reward_param_derivative(&x, theta, i);
    }
    Ok(gradient)
}

/// Central finite difference in `θ_i` with common Brownian increments.
pub fn finite_difference_sde_replicate<S: Scalar, M: SdeModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    x0: &[S],
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
    let grid = main_grid(model, config)?;
    let base = simulate_sde_path(model, theta, x0, grid, &mut stream.derive(label::MAIN))?;
    let increments = base.increments().to_vec();

    let mut plus = theta.to_vec();
    plus[i] += h;
    let mut minus = theta.to_vec();
    minus[i] -= h;
    let up = simulate_sde_path_with_increments(model, &plus, x0, grid, increments.clone())?;
    let down = simulate_sde_path_with_increments(model, &minus, x0, grid, increments)?;
    Ok((path_objective(model, &plus, &up) - path_objective(model, &minus, &down)) / (h + h))
}
