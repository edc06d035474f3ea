use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::linalg::solve_tridiagonal;
use crate::models::{diffusion_matrix_from_sigma, diffusion_matrix_param_derivative_from, SdeModel};
use crate::scalar::Scalar;

/// Uniform space-time lattice on `[x_min, x_max] × [0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaceTimeGrid<S> {
    pub x_min: S,
    pub x_max: S,
    pub nx: usize,
    pub horizon: S,
    pub nt: usize,
}

impl<S: Scalar> SpaceTimeGrid<S> {
    pub fn new(x_min: S, x_max: S, nx: usize, horizon: S, nt: usize) -> Result<Self> {
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::Config(format!("space domain [{x_min}, {x_max}] is empty")));
        }
        if nx < 3 || nt < 2 {
            return Err(Error::Config(format!("grid needs nx ≥ 3 and nt ≥ 2 (got {nx}, {nt})")));
        }
        if !(horizon > S::zero()) || !horizon.is_finite() {
            return Err(Error::Config(format!("horizon {horizon} must be positive")));
        }
        Ok(Self {
            x_min,
            x_max,
            nx,
            horizon,
            nt,
        })
    }

    pub fn dx(&self) -> S {
        (self.x_max - self.x_min) / S::of_usize(self.nx - 1)
    }

    pub fn dt(&self) -> S {
        self.horizon / S::of_usize(self.nt - 1)
    }

    pub fn x(&self, j: usize) -> S {
        self.x_min + S::of_usize(j) * self.dx()
    }

    pub fn t(&self, n: usize) -> S {
        if n + 1 == self.nt {
            self.horizon
        } else {
            S::of_usize(n) * self.dt()
        }
    }

    /// Trapezoid integral of nodal values over `x`.
    pub fn integrate_x(&self, values: &[S]) -> S {
        let last = values.len() - 1;
        let inner: S = values[1..last].iter().copied().sum();
        self.dx() * (inner + S::of(0.5) * (values[0] + values[last]))
    }

    /// Trapezoid weight of time node `n`.
    fn time_weight(&self, n: usize) -> S {
        if n == 0 || n + 1 == self.nt {
            S::of(0.5) * self.dt()
        } else {
            self.dt()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    ValueFunction,
    Density,
}

/// Grid samples `values[n·nx + j] ≈ f(t_n, x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSolution<S> {
    pub grid: SpaceTimeGrid<S>,
    pub kind: FieldKind,
    values: Vec<S>,
}

impl<S: Scalar> FieldSolution<S> {
    pub fn slice(&self, n: usize) -> &[S] {
        &self.values[n * self.grid.nx..(n + 1) * self.grid.nx]
    }

    /// Linear interpolation in `x` at time node `n`.
    pub fn interpolate(&self, n: usize, x: S) -> S {
        let g = &self.grid;
        let pos = ((x - g.x_min) / g.dx()).max(S::zero());
        let j = pos.floor().to_usize().unwrap_or(0).min(g.nx - 2);
        let frac = pos - S::of_usize(j);
        let row = self.slice(n);
        row[j] + frac * (row[j + 1] - row[j])
    }

    pub fn mass(&self, n: usize) -> S {
        self.grid.integrate_x(self.slice(n))
    }

    pub fn mean(&self, n: usize) -> S {
        let row = self.slice(n);
        let weighted: Vec<S> = (0..self.grid.nx).map(|j| self.grid.x(j) * row[j]).collect();
        self.grid.integrate_x(&weighted) / self.mass(n)
    }

    pub fn variance(&self, n: usize) -> S {
        let row = self.slice(n);
        let m = self.mean(n);
        let weighted: Vec<S> = (0..self.grid.nx)
            .map(|j| {
                let c = self.grid.x(j) - m;
                c * c * row[j]
            })
            .collect();
        self.grid.integrate_x(&weighted) / self.mass(n)
    }
}

fn require_scalar_model<S: Scalar, M: SdeModel<S> + ?Sized>(model: &M, grid: &SpaceTimeGrid<S>) -> Result<()> {
    if model.state_dim() != 1 {
        return Err(Error::ModelContract(format!(
            "grid solvers need a scalar SDE, model has d = {}",
            model.state_dim()
        )));
    }
    if grid.nx < 4 {
        return Err(Error::Config("grid solvers need at least 4 space nodes".into()));
    }
    Ok(())
}

/// Drift and diffusion coefficient `(μ, a)` at every node of time `t`.
fn coefficients<S: Scalar, M: SdeModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    grid: &SpaceTimeGrid<S>,
    t: S,
) -> Result<(Vec<S>, Vec<S>)> {
    let w = model.noise_dim();
    let mut mu = Vec::with_capacity(grid.nx);
    let mut a = Vec::with_capacity(grid.nx);
    for j in 0..grid.nx {
        let x = [grid.x(j)];
        let drift = model.drift(t, &x, theta);
        check_len("drift", drift.len(), 1)?;
        let sigma = model.diffusion(t, &x, theta);
        check_len("diffusion", sigma.len(), w)?;
        mu.push(drift[0]);
        a.push(diffusion_matrix_from_sigma(&sigma, 1, w)[0]);
    }
    Ok((mu, a))
}

/// Tridiagonal stencil of the generator `μ ∂x + a ∂²x` at interior nodes:
/// `(lower, diag, upper)` indexed by node.
fn generator_stencil<S: Scalar>(mu: &[S], a: &[S], dx: S) -> (Vec<S>, Vec<S>, Vec<S>) {
    let inv_dx2 = S::one() / (dx * dx);
    let inv_2dx = S::one() / (dx + dx);
    let lower = mu.iter().zip(a).map(|(&m, &d)| d * inv_dx2 - m * inv_2dx).collect();
    let diag = a.iter().map(|&d| -S::of(2.0) * d * inv_dx2).collect();
    let upper = mu.iter().zip(a).map(|(&m, &d)| d * inv_dx2 + m * inv_2dx).collect();
    (lower, diag, upper)
}

/// Backward Crank–Nicolson solve of the Feynman–Kac equation with
/// zero-second-derivative (linear extrapolation) boundaries.
pub fn solve_feynman_kac_1d<S: Scalar, M: SdeModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    grid: &SpaceTimeGrid<S>,
) -> Result<FieldSolution<S>> {
    require_scalar_model(model, grid)?;
    let (nx, nt) = (grid.nx, grid.nt);
    let last = nx - 1;
    let dx = grid.dx();
    let half_dt = S::of(0.5) * grid.dt();
    let with_rate = model.has_reward_rate();
    let rate_at = |t: S| -> Vec<S> {
        (0..nx)
            .map(|j| if with_rate { model.reward_rate(t, &[grid.x(j)], theta) } else { S::zero() })
            .collect()
    };

    let mut values = vec![S::zero(); nx * nt];
    for j in 0..nx {
        values[(nt - 1) * nx + j] = model.terminal_reward(&[grid.x(j)], theta);
    }

    let (mu, a) = coefficients(model, theta, grid, grid.t(nt - 1))?;
    let mut stencil_next = generator_stencil(&mu, &a, dx);
    let mut rate_next = rate_at(grid.t(nt - 1));
    let interior = nx - 2;
    let (mut lo, mut di, mut up, mut rhs) = (
        vec![S::zero(); interior],
        vec![S::zero(); interior],
        vec![S::zero(); interior],
        vec![S::zero(); interior],
    );
    let mut scratch = Vec::new();

    for n in (0..nt - 1).rev() {
        let t = grid.t(n);
        let (mu, a) = coefficients(model, theta, grid, t)?;
        let stencil = generator_stencil(&mu, &a, dx);
        let rate = rate_at(t);
        let v_next: Vec<S> = values[(n + 1) * nx..(n + 2) * nx].to_vec();

        for j in 1..last {
            let r = j - 1;
            let (ln, dn, un) = (stencil_next.0[j], stencil_next.1[j], stencil_next.2[j]);
            rhs[r] = v_next[j]
                + half_dt * (ln * v_next[j - 1] + dn * v_next[j] + un * v_next[j + 1])
                + half_dt * (rate[j] + rate_next[j]);
            lo[r] = -half_dt * stencil.0[j];
            di[r] = S::one() - half_dt * stencil.1[j];
            up[r] = -half_dt * stencil.2[j];
        }
        // fold v_0 = 2 v_1 − v_2 and v_N = 2 v_{N−1} − v_{N−2} into the end rows
        let end = interior - 1;
        let (l0, lend) = (lo[0], up[end]);
        di[0] += l0 + l0;
        up[0] -= l0;
        lo[0] = S::zero();
        di[end] += lend + lend;
        lo[end] -= lend;
        up[end] = S::zero();

        solve_tridiagonal(&lo, &di, &up, &mut rhs, &mut scratch).map_err(|row| Error::SingularSystem { row })?;
        let row = &mut values[n * nx..(n + 1) * nx];
        row[1..last].copy_from_slice(&rhs);
        row[0] = row[1] + row[1] - row[2];
        row[last] = row[last - 1] + row[last - 1] - row[last - 2];

        stencil_next = stencil;
        rate_next = rate;
    }
    Ok(FieldSolution {
        grid: *grid,
        kind: FieldKind::ValueFunction,
        values,
    })
}

/// Forward Fokker–Planck operator `−∂x(μ p) + ∂²x(a p)` in conservative
/// form; entries are the coefficients multiplying `p_{j−1}, p_j, p_{j+1}`.
fn fokker_planck_stencil<S: Scalar>(mu: &[S], a: &[S], dx: S) -> (Vec<S>, Vec<S>, Vec<S>) {
    let inv_dx2 = S::one() / (dx * dx);
    let inv_2dx = S::one() / (dx + dx);
    let nx = mu.len();
    let mut lower = vec![S::zero(); nx];
    let mut diag = vec![S::zero(); nx];
    let mut upper = vec![S::zero(); nx];
    for j in 1..nx - 1 {
        lower[j] = mu[j - 1] * inv_2dx + a[j - 1] * inv_dx2;
        diag[j] = -S::of(2.0) * a[j] * inv_dx2;
        upper[j] = -mu[j + 1] * inv_2dx + a[j + 1] * inv_dx2;
    }
    (lower, diag, upper)
}

/// Number of leading Crank–Nicolson steps replaced by two implicit Euler
/// half-steps each, to damp the grid-scale content of the mollified delta.
const SMOOTHING_STEPS: usize = 2;

/// Forward Crank–Nicolson solve of the Fokker–Planck equation from a
/// Gaussian of width `2·dx` at `x0`, renormalized to unit mass on the grid.
/// Boundaries are absorbing (`p = 0`).
pub fn solve_fokker_planck_1d<S: Scalar, M: SdeModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    x0: S,
    grid: &SpaceTimeGrid<S>,
) -> Result<FieldSolution<S>> {
    require_scalar_model(model, grid)?;
    let (nx, nt) = (grid.nx, grid.nt);
    let last = nx - 1;
    let dx = grid.dx();
    let dt = grid.dt();
    if !(x0 > grid.x_min && x0 < grid.x_max) {
        return Err(Error::Config(format!("initial point {x0} outside the grid")));
    }

    let width = S::of(2.0) * dx;
    let mut initial: Vec<S> = (0..nx)
        .map(|j| {
            let z = (grid.x(j) - x0) / width;
            (-S::of(0.5) * z * z).exp()
        })
        .collect();
    initial[0] = S::zero();
    initial[last] = S::zero();
    let mass = grid.integrate_x(&initial);
    for v in initial.iter_mut() {
        *v /= mass;
    }

    let mut values = Vec::with_capacity(nx * nt);
    values.extend_from_slice(&initial);
    let interior = nx - 2;
    let (mut lo, mut di, mut up, mut rhs) = (
        vec![S::zero(); interior],
        vec![S::zero(); interior],
        vec![S::zero(); interior],
        vec![S::zero(); interior],
    );
    let mut scratch = Vec::new();
    let mut p = initial;

    // (I − c·A(t_new)) p_new = p + e·A(t_old) p
    let mut step = |p: &mut Vec<S>, t_old: S, t_new: S, implicit: S, explicit: S| -> Result<()> {
        let (mu_new, a_new) = coefficients(model, theta, grid, t_new)?;
        let new = fokker_planck_stencil(&mu_new, &a_new, dx);
        let old = if explicit > S::zero() {
            let (mu_old, a_old) = coefficients(model, theta, grid, t_old)?;
            Some(fokker_planck_stencil(&mu_old, &a_old, dx))
        } else {
            None
        };
        for j in 1..last {
            let r = j - 1;
            let mut value = p[j];
            if let Some((l, d, u)) = &old {
                value += explicit * (l[j] * p[j - 1] + d[j] * p[j] + u[j] * p[j + 1]);
            }
            rhs[r] = value;
            lo[r] = if j > 1 { -implicit * new.0[j] } else { S::zero() };
            di[r] = S::one() - implicit * new.1[j];
            up[r] = if j + 1 < last { -implicit * new.2[j] } else { S::zero() };
        }
        solve_tridiagonal(&lo, &di, &up, &mut rhs, &mut scratch).map_err(|row| Error::SingularSystem { row })?;
        p[1..last].copy_from_slice(&rhs);
        p[0] = S::zero();
        p[last] = S::zero();
        Ok(())
    };

    let half = S::of(0.5);
    for n in 0..nt - 1 {
        let (t0, t1) = (grid.t(n), grid.t(n + 1));
        if n < SMOOTHING_STEPS {
            let mid = t0 + half * dt;
            step(&mut p, t0, mid, half * dt, S::zero())?;
            step(&mut p, mid, t1, half * dt, S::zero())?;
        } else {
            step(&mut p, t0, t1, half * dt, half * dt)?;
        }
        values.extend_from_slice(&p);
    }
    Ok(FieldSolution {
        grid: *grid,
        kind: FieldKind::Density,
        values,
    })
}

/// Both sides of the adjoint identity for one parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointReport {
    pub param_index: usize,
    pub x0: f64,
    pub nx: usize,
    pub nt: usize,
    /// `∂θi v(0, x0)` by central difference of two Feynman–Kac solves.
    pub lhs: f64,
    /// `[∫⟨∂θiL v, p⟩ dt, ∫⟨∂θiρ, p⟩ dt, ⟨∂θi g, p(T)⟩]`.
    pub rhs_terms: [f64; 3],
    pub rhs: f64,
    pub abs_gap: f64,
}

/// Evaluates both sides of `∂θi v(0, x0) = ∫⟨∂θiL v, p⟩ + ∫⟨∂θiρ, p⟩ + ⟨∂θi g, p(T)⟩`
/// on the grid, with `∂x v` and `∂²x v` from central differences.
pub fn check_adjoint_identity<S: Scalar, M: SdeModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    i: usize,
    x0: S,
    grid: &SpaceTimeGrid<S>,
    fd_step_theta: S,
) -> Result<AdjointReport> {
    let n_params = model.param_count();
    check_len("parameter vector", theta.len(), n_params)?;
    if i >= n_params {
        return Err(Error::ParamIndex { index: i, count: n_params });
    }
    if !(fd_step_theta > S::zero()) {
        return Err(Error::Config(format!("parameter step {fd_step_theta} must be positive")));
    }
    let value = solve_feynman_kac_1d(model, theta, grid)?;
    let density = solve_fokker_planck_1d(model, theta, x0, grid)?;

    let (nx, nt) = (grid.nx, grid.nt);
    let w = model.noise_dim();
    let dx = grid.dx();
    let with_rate = model.has_reward_rate();
    let mut generator_term = S::zero();
    let mut rate_term = S::zero();
    let mut integrand_l = vec![S::zero(); nx];
    let mut integrand_r = vec![S::zero(); nx];
    for n in 0..nt {
        let t = grid.t(n);
        let v = value.slice(n);
        let p = density.slice(n);
        for j in 1..nx - 1 {
            let x = [grid.x(j)];
            let v_x = (v[j + 1] - v[j - 1]) / (dx + dx);
            let v_xx = (v[j + 1] - S::of(2.0) * v[j] + v[j - 1]) / (dx * dx);
            let d_mu = model.drift_param_derivative(t, &x, theta, i);
            check_len("drift parameter derivative", d_mu.len(), 1)?;
            let sigma = model.diffusion(t, &x, theta);
            let d_sigma = model.diffusion_param_derivative(t, &x, theta, i);
            check_len("diffusion parameter derivative", d_sigma.len(), w)?;
            let d_a = diffusion_matrix_param_derivative_from(&sigma, &d_sigma, 1, w)[0];
            integrand_l[j] = (v_x * d_mu[0] + v_xx * d_a) * p[j];
            if with_rate {
                integrand_r[j] = model.reward_rate_param_derivative(t, &x, theta, i) * p[j];
            }
        }
        generator_term += grid.time_weight(n) * grid.integrate_x(&integrand_l);
        if with_rate {
            rate_term += grid.time_weight(n) * grid.integrate_x(&integrand_r);
        }
    }
    let terminal: Vec<S> = (0..nx)
        .map(|j| model.terminal_reward_param_derivative(&[grid.x(j)], theta, i) * density.slice(nt - 1)[j])
        .collect();
    let terminal_term = grid.integrate_x(&terminal);

    let mut plus = theta.to_vec();
    plus[i] += fd_step_theta;
    let mut minus = theta.to_vec();
    minus[i] -= fd_step_theta;
    let v_plus = solve_feynman_kac_1d(model, &plus, grid)?.interpolate(0, x0);
    let v_minus = solve_feynman_kac_1d(model, &minus, grid)?.interpolate(0, x0);
    let lhs = ((v_plus - v_minus) / (fd_step_theta + fd_step_theta)).to_f64_lossy();

    let rhs_terms = [
        generator_term.to_f64_lossy(),
        rate_term.to_f64_lossy(),
        terminal_term.to_f64_lossy(),
    ];
    let rhs = rhs_terms.iter().sum::<f64>();
    Ok(AdjointReport {
        param_index: i,
        x0: x0.to_f64_lossy(),
        nx,
        nt,
        lhs,
        rhs_terms,
        rhs,
        abs_gap: (lhs - rhs).abs(),
    })
}
