//! Euler–Maruyama simulation and first/second variation processes.
//!
//! `J` and `K` are the exact first and second derivatives of the discrete
//! Euler flow with respect to the starting point, so the pathwise estimates of
//! `∇v` and `∇²v` are unbiased for the discretized value function.

use crate::error::{check_len, Error, Result};
use crate::models::SdeModel;
use crate::rng::Stream;
use crate::scalar::{all_finite, Scalar};
use crate::stats::aggregate_statistics;

/// Uniform grid `t0 < t0 + dt < … < t_end` with `steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<S> {
    t0: S,
    t_end: S,
    steps: usize,
}

impl<S: Scalar> TimeGrid<S> {
    pub fn new(t0: S, t_end: S, steps: usize) -> Result<Self> {
        if !(t0 < t_end) || !t0.is_finite() || !t_end.is_finite() {
            return Err(Error::Config(format!("time grid needs t0 < T (got {t0}, {t_end})")));
        }
        if steps == 0 {
            return Err(Error::Config("time grid needs at least one step".into()));
        }
        Ok(Self { t0, t_end, steps })
    }

    pub fn start(&self) -> S {
        self.t0
    }

    pub fn end(&self) -> S {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> S {
        (self.t_end - self.t0) / S::of_usize(self.steps)
    }

    /// Time of node `k`; node `steps` is exactly `t_end`.
    pub fn time(&self, k: usize) -> S {
        if k == self.steps {
            self.t_end
        } else {
            self.t0 + S::of_usize(k) * self.dt()
        }
    }

    /// Index of the last node at or before `t` (clamped to `[0, steps − 1]`).
    pub fn node_at_or_before(&self, t: S) -> usize {
        let k = ((t - self.t0) / self.dt()).floor().to_usize().unwrap_or(0);
        k.min(self.steps - 1)
    }
}

/// A simulated Euler path that keeps its Brownian increments.
#[derive(Debug, Clone, PartialEq)]
pub struct SdePath<S> {
    pub grid: TimeGrid<S>,
    dim: usize,
    noise_dim: usize,
    states: Vec<S>,
    increments: Vec<S>,
}

impl<S: Scalar> SdePath<S> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    /// State at node `k`, `0 ≤ k ≤ steps`.
    pub fn state(&self, k: usize) -> &[S] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn terminal(&self) -> &[S] {
        self.state(self.grid.steps())
    }

    /// Brownian increment over `[t_k, t_{k+1}]`.
    pub fn increment(&self, k: usize) -> &[S] {
        &self.increments[k * self.noise_dim..(k + 1) * self.noise_dim]
    }

    pub fn increments(&self) -> &[S] {
        &self.increments
    }
}

/// Order of the variation processes propagated along a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariationOrder {
    First,
    Second,
}

/// First (`J`) and optional second (`K`) variation along a path.
///
/// `J` is stored as `d×d` blocks with `J[a·d + i] = ∂X_a / ∂x_i`; `K` as
/// `d×d×d` blocks with `K[(a·d + i)·d + j] = ∂²X_a / ∂x_i ∂x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationBundle<S> {
    dim: usize,
    first: Vec<S>,
    second: Option<Vec<S>>,
}

impl<S: Scalar> VariationBundle<S> {
    pub fn first(&self, k: usize) -> &[S] {
        let b = self.dim * self.dim;
        &self.first[k * b..(k + 1) * b]
    }

    pub fn second(&self, k: usize) -> Option<&[S]> {
        let b = self.dim * self.dim * self.dim;
        self.second.as_ref().map(|s| &s[k * b..(k + 1) * b])
    }
}

fn draw_increments<S: Scalar>(stream: &mut Stream, count: usize, dt: S) -> Vec<S> {
    let scale = dt.sqrt();
    (0..count).map(|_| stream.normal::<S>() * scale).collect()
}

/// One Euler step `x ← x + μ dt + σ ΔB` given precomputed `μ`, `σ`.
#[inline]
fn euler_update<S: Scalar>(x: &mut [S], mu: &[S], sigma: &[S], db: &[S], dt: S) {
    let w = db.len();
    for (a, xa) in x.iter_mut().enumerate() {
        let mut noise = S::zero();
        for j in 0..w {
            noise += sigma[a * w + j] * db[j];
        }
        *xa += mu[a] * dt + noise;
    }
}

/// Euler path driven by the given increments (`steps·w` values).
pub fn simulate_sde_path_with_increments<S: Scalar, M: SdeModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    x0: &[S],
    grid: TimeGrid<S>,
    increments: Vec<S>,
) -> Result<SdePath<S>> {
    let (d, w) = (model.state_dim(), model.noise_dim());
    check_len("initial state", x0.len(), d)?;
    check_len("increments", increments.len(), grid.steps() * w)?;
    if !all_finite(x0) {
        return Err(Error::Divergence { step: 0 });
    }
    let dt = grid.dt();
    let mut states = Vec::with_capacity((grid.steps() + 1) * d);
    states.extend_from_slice(x0);
    let mut x = x0.to_vec();
    for k in 0..grid.steps() {
        let t = grid.time(k);
        let mu = model.drift(t, &x, theta);
        check_len("drift", mu.len(), d)?;
        let sigma = model.diffusion(t, &x, theta);
        check_len("diffusion", sigma.len(), d * w)?;
        euler_update(&mut x, &mu, &sigma, &increments[k * w..(k + 1) * w], dt);
        if !all_finite(&x) {
            return Err(Error::Divergence { step: k + 1 });
        }
        states.extend_from_slice(&x);
    }
    Ok(SdePath {
        grid,
        dim: d,
        noise_dim: w,
        states,
        increments,
    })
}

/// Euler–Maruyama path `X_{k+1} = X_k + μ(t_k, X_k) dt + σ(t_k, X_k) ΔB_k`.
pub fn simulate_sde_path<S: Scalar, M: SdeModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    x0: &[S],
    grid: TimeGrid<S>,
    stream: &mut Stream,
) -> Result<SdePath<S>> {
    let increments = draw_increments(stream, grid.steps() * model.noise_dim(), grid.dt());
    simulate_sde_path_with_increments(model, theta, x0, grid, increments)
}

/// State handed to a variation visitor at node `k`.
pub(crate) struct VariationNode<'a, S> {
    pub k: usize,
    pub t: S,
    pub x: &'a [S],
    pub first: &'a [S],
    pub second: Option<&'a [S]>,
}

/// Propagates the Euler path with `J` (and `K`), calling `visit` at every node
/// `0..=steps`. Increments are drawn from `stream` one step at a time.
pub(crate) fn propagate_variations<S, M, F>(
    model: &M,
    theta: &[S],
    x: &[S],
    grid: TimeGrid<S>,
    stream: &mut Stream,
    order: VariationOrder,
    mut visit: F,
) -> Result<Vec<S>>
where
    S: Scalar,
    M: SdeModel<S> + ?Sized,
    F: FnMut(VariationNode<'_, S>),
{
    let (d, w) = (model.state_dim(), model.noise_dim());
    check_len("initial state", x.len(), d)?;
    let dt = grid.dt();
    let sqrt_dt = dt.sqrt();
    let second_order = order == VariationOrder::Second;

    let mut state = x.to_vec();
    let mut jac = crate::linalg::identity::<S>(d);
    let mut jac_next = vec![S::zero(); d * d];
    let mut hess = if second_order { vec![S::zero(); d * d * d] } else { Vec::new() };
    let mut hess_next = hess.clone();
    let mut step_jac = vec![S::zero(); d * d];
    let mut step_hess = vec![S::zero(); if second_order { d * d * d } else { 0 }];
    let mut increments = vec![S::zero(); w];
    let mut increments_out = Vec::with_capacity(grid.steps() * w);

    for k in 0..grid.steps() {
        let t = grid.time(k);
        visit(VariationNode {
            k,
            t,
            x: &state,
            first: &jac,
            second: second_order.then_some(hess.as_slice()),
        });

        let mu = model.drift(t, &state, theta);
        check_len("drift", mu.len(), d)?;
        let sigma = model.diffusion(t, &state, theta);
        check_len("diffusion", sigma.len(), d * w)?;
        let mu_x = model.drift_jacobian(t, &state, theta);
        check_len("drift jacobian", mu_x.len(), d * d)?;
        let sigma_x = model.diffusion_jacobian(t, &state, theta);
        check_len("diffusion jacobian", sigma_x.len(), d * w * d)?;
        for db in increments.iter_mut() {
            *db = stream.normal::<S>() * sqrt_dt;
        }
        increments_out.extend_from_slice(&increments);

        // Jacobian of the Euler map: I + ∇μ dt + Σ_j ∇σ_{·j} ΔB_j
        for a in 0..d {
            for b in 0..d {
                let mut v = mu_x[a * d + b] * dt;
                for j in 0..w {
                    v += sigma_x[(a * w + j) * d + b] * increments[j];
                }
                if a == b {
                    v += S::one();
                }
                step_jac[a * d + b] = v;
            }
        }

        if second_order {
            let mu_xx = model.drift_hessian(t, &state, theta);
            check_len("drift hessian", mu_xx.len(), d * d * d)?;
            let sigma_xx = model.diffusion_hessian(t, &state, theta);
            check_len("diffusion hessian", sigma_xx.len(), d * w * d * d)?;
            for a in 0..d {
                for b in 0..d {
                    for c in 0..d {
                        let mut v = mu_xx[(a * d + b) * d + c] * dt;
                        for j in 0..w {
                            v += sigma_xx[((a * w + j) * d + b) * d + c] * increments[j];
                        }
                        step_hess[(a * d + b) * d + c] = v;
                    }
                }
            }
            // K'_{a,ij} = Σ_b F_ab K_{b,ij} + Σ_bc F_abc J_bi J_cj
            for a in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        let mut v = S::zero();
                        for b in 0..d {
                            v += step_jac[a * d + b] * hess[(b * d + i) * d + j];
                            for c in 0..d {
                                v += step_hess[(a * d + b) * d + c] * jac[b * d + i] * jac[c * d + j];
                            }
                        }
                        hess_next[(a * d + i) * d + j] = v;
                    }
                }
            }
            std::mem::swap(&mut hess, &mut hess_next);
        }

        crate::linalg::matmul_square(&step_jac, &jac, d, &mut jac_next);
        std::mem::swap(&mut jac, &mut jac_next);
        euler_update(&mut state, &mu, &sigma, &increments, dt);
        if !all_finite(&state) || !all_finite(&jac) {
            return Err(Error::Divergence { step: k + 1 });
        }
    }
    visit(VariationNode {
        k: grid.steps(),
        t: grid.end(),
        x: &state,
        first: &jac,
        second: second_order.then_some(hess.as_slice()),
    });
    Ok(increments_out)
}

/// Euler path from `(t_start, x)` together with its variation processes.
pub fn simulate_with_variations<S: Scalar, M: SdeModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    x: &[S],
    grid: TimeGrid<S>,
    stream: &mut Stream,
    order: VariationOrder,
) -> Result<(SdePath<S>, VariationBundle<S>)> {
    let d = model.state_dim();
    let nodes = grid.steps() + 1;
    let mut states = Vec::with_capacity(nodes * d);
    let mut first = Vec::with_capacity(nodes * d * d);
    let mut second = (order == VariationOrder::Second).then(|| Vec::with_capacity(nodes * d * d * d));
    let increments = propagate_variations(model, theta, x, grid, stream, order, |node| {
        states.extend_from_slice(node.x);
        first.extend_from_slice(node.first);
        if let (Some(store), Some(k)) = (second.as_mut(), node.second) {
            store.extend_from_slice(k);
        }
    })?;
    Ok((
        SdePath {
            grid,
            dim: d,
            noise_dim: model.noise_dim(),
            states,
            increments,
        },
        VariationBundle { dim: d, first, second },
    ))
}

/// Monte Carlo estimates of `∇v(t, x)` and `∇²v(t, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueDerivatives<S> {
    pub grad: Vec<S>,
    /// Symmetrized, row-major `d×d`.
    pub hess: Vec<S>,
    pub grad_stderr: Vec<S>,
    pub hess_stderr: Vec<S>,
}

/// Adds `Jᵀ·u` into `grad` and `Σ_ab U_ab J_ai J_bj + Σ_a u_a K_{a,ij}` into `hess`.
fn accumulate_pathwise<S: Scalar>(
    d: usize,
    scale: S,
    grad_u: &[S],
    hess_u: &[S],
    jac: &[S],
    second: &[S],
    grad: &mut [S],
    hess: &mut [S],
) {
    for i in 0..d {
        let mut g = S::zero();
        for a in 0..d {
            g += jac[a * d + i] * grad_u[a];
        }
        grad[i] += scale * g;
    }
    for i in 0..d {
        for j in 0..d {
            let mut h = S::zero();
            for a in 0..d {
                let ja = jac[a * d + i];
                for b in 0..d {
                    h += hess_u[a * d + b] * ja * jac[b * d + j];
                }
                h += grad_u[a] * second[(a * d + i) * d + j];
            }
            hess[i * d + j] += scale * h;
        }
    }
}

/// Averages `n_aux` independent pathwise runs from `(t, x)` on a
/// `steps_aux`-step grid over `[t, T]`. At `t = T` with `steps_aux = 0` it
/// returns the terminal reward derivatives exactly.
pub fn estimate_value_derivatives_at<S: Scalar, M: SdeModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    t: S,
    x: &[S],
    n_aux: usize,
    steps_aux: usize,
    stream: &Stream,
) -> Result<ValueDerivatives<S>> {
    if n_aux == 0 {
        return Err(Error::Config("n_aux must be at least 1".into()));
    }
    let d = model.state_dim();
    if steps_aux == 0 {
        if t != model.horizon() {
            return Err(Error::Config(format!("zero auxiliary steps at t = {t} before the horizon")));
        }
        let hess = model.terminal_reward_hessian(x, theta);
        return Ok(ValueDerivatives {
            grad: model.terminal_reward_gradient(x, theta),
            grad_stderr: vec![S::zero(); d],
            hess_stderr: vec![S::zero(); hess.len()],
            hess,
        });
    }
    let grid = TimeGrid::new(t, model.horizon(), steps_aux)?;
    let dt = grid.dt();
    let with_rate = model.has_reward_rate();
    let mut grad_samples = Vec::with_capacity(n_aux);
    let mut hess_samples = Vec::with_capacity(n_aux);

    for r in 0..n_aux {
        let mut aux_stream = stream.derive(r as u64);
        let mut grad = vec![S::zero(); d];
        let mut hess = vec![S::zero(); d * d];
        let mut shape_error = None;
        propagate_variations(model, theta, x, grid, &mut aux_stream, VariationOrder::Second, |node| {
            let second = node.second.expect("second-order propagation");
            let (grad_u, hess_u, scale) = if node.k == grid.steps() {
                (model.terminal_reward_gradient(node.x, theta), model.terminal_reward_hessian(node.x, theta), S::one())
            } else if with_rate {
                (
                    model.reward_rate_gradient(node.t, node.x, theta),
                    model.reward_rate_hessian(node.t, node.x, theta),
                    dt,
                )
            } else {
                return;
            };
            if grad_u.len() != d || hess_u.len() != d * d {
                shape_error.get_or_insert(Error::Shape {
                    what: "reward gradient/hessian",
                    expected: d,
                    got: grad_u.len(),
                });
                return;
            }
            accumulate_pathwise(d, scale, &grad_u, &hess_u, node.first, second, &mut grad, &mut hess);
        })?;
        if let Some(err) = shape_error {
            return Err(err);
        }
        grad_samples.push(grad);
        hess_samples.push(hess);
    }

    let (grad, grad_stderr) = aggregate_statistics(&grad_samples)?;
    let (mut hess, hess_stderr) = aggregate_statistics(&hess_samples)?;
    let half = S::of(0.5);
    for i in 0..d {
        for j in (i + 1)..d {
            let s = half * (hess[i * d + j] + hess[j * d + i]);
            hess[i * d + j] = s;
            hess[j * d + i] = s;
        }
    }
    Ok(ValueDerivatives {
        grad,
        hess,
        grad_stderr,
        hess_stderr,
    })
}

/// Discrete objective `Σ_{k<N} ρ(t_k, X_k) dt + g(X_N)` along a path.
pub fn path_objective<S: Scalar, M: SdeModel<S> + ?Sized>(model: &M, theta: &[S], path: &SdePath<S>) -> S {
    let grid = path.grid;
    let mut total = model.terminal_reward(path.terminal(), theta);
    if model.has_reward_rate() {
        let dt = grid.dt();
        for k in 0..grid.steps() {
            total += model.reward_rate(grid.time(k), path.state(k), theta) * dt;
        }
    }
    total
}
