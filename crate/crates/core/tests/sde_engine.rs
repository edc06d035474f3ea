use gengrad::sde_engine::{simulate_with_variations, VariationOrder};
use gengrad::{
    estimate_value_derivatives_at, simulate_sde_path, solve_feynman_kac_1d, DriftedBrownianMotion,
    GeometricBrownianMotion, OrnsteinUhlenbeck, SdeModel, SdeReward, SpaceTimeGrid, Stream, TimeGrid,
};

/// `dX = μ dt + s dB` in one dimension with constant `μ`, `s`; θ is unused.
struct Constant {
    mu: f64,
    s: f64,
}

impl SdeModel<f64> for Constant {
    fn state_dim(&self) -> usize {
        1
    }
    fn noise_dim(&self) -> usize {
        1
    }
    fn param_count(&self) -> usize {
        1
    }
    fn horizon(&self) -> f64 {
        1.0
    }
    fn drift(&self, _t: f64, _x: &[f64], _th: &[f64]) -> Vec<f64> {
        vec![self.mu]
    }
    fn diffusion(&self, _t: f64, _x: &[f64], _th: &[f64]) -> Vec<f64> {
        vec![self.s]
    }
    fn terminal_reward(&self, x: &[f64], _th: &[f64]) -> f64 {
        x[0] * x[0]
    }
    fn drift_param_derivative(&self, _t: f64, _x: &[f64], _th: &[f64], _i: usize) -> Vec<f64> {
        vec![0.0]
    }
    fn diffusion_param_derivative(&self, _t: f64, _x: &[f64], _th: &[f64], _i: usize) -> Vec<f64> {
        vec![0.0]
    }
    fn drift_jacobian(&self, _t: f64, _x: &[f64], _th: &[f64]) -> Vec<f64> {
        vec![0.0]
    }
    fn diffusion_jacobian(&self, _t: f64, _x: &[f64], _th: &[f64]) -> Vec<f64> {
        vec![0.0]
    }
    fn drift_hessian(&self, _t: f64, _x: &[f64], _th: &[f64]) -> Vec<f64> {
        vec![0.0]
    }
    fn diffusion_hessian(&self, _t: f64, _x: &[f64], _th: &[f64]) -> Vec<f64> {
        vec![0.0]
    }
    fn terminal_reward_gradient(&self, x: &[f64], _th: &[f64]) -> Vec<f64> {
        vec![2.0 * x[0]]
    }
    fn terminal_reward_hessian(&self, _x: &[f64], _th: &[f64]) -> Vec<f64> {
        vec![2.0]
    }
}

/// `dX = A X dt + s dB` in two dimensions with `g = x_0 + x_1`.
struct Linear2 {
    a: [f64; 4],
    s: f64,
}

impl SdeModel<f64> for Linear2 {
    fn state_dim(&self) -> usize {
        2
    }
    fn noise_dim(&self) -> usize {
        2
    }
    fn param_count(&self) -> usize {
        1
    }
    fn horizon(&self) -> f64 {
        1.0
    }
    fn drift(&self, _t: f64, x: &[f64], _th: &[f64]) -> Vec<f64> {
        let a = self.a;
        vec![a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1]]
    }
    fn diffusion(&self, _t: f64, _x: &[f64], _th: &[f64]) -> Vec<f64> {
        vec![self.s, 0.0, 0.0, self.s]
    }
    fn terminal_reward(&self, x: &[f64], _th: &[f64]) -> f64 {
        x[0] + x[1]
    }
    fn drift_param_derivative(&self, _t: f64, _x: &[f64], _th: &[f64], _i: usize) -> Vec<f64> {
        vec![0.0; 2]
    }
    fn diffusion_param_derivative(&self, _t: f64, _x: &[f64], _th: &[f64], _i: usize) -> Vec<f64> {
        vec![0.0; 4]
    }
    fn drift_jacobian(&self, _t: f64, _x: &[f64], _th: &[f64]) -> Vec<f64> {
        self.a.to_vec()
    }
    fn diffusion_jacobian(&self, _t: f64, _x: &[f64], _th: &[f64]) -> Vec<f64> {
        vec![0.0; 8]
    }
    fn drift_hessian(&self, _t: f64, _x: &[f64], _th: &[f64]) -> Vec<f64> {
        vec![0.0; 8]
    }
    fn diffusion_hessian(&self, _t: f64, _x: &[f64], _th: &[f64]) -> Vec<f64> {
        vec![0.0; 16]
    }
    fn terminal_reward_gradient(&self, _x: &[f64], _th: &[f64]) -> Vec<f64> {
        vec![1.0; 2]
    }
    fn terminal_reward_hessian(&self, _x: &[f64], _th: &[f64]) -> Vec<f64> {
        vec![0.0; 4]
    }
}

fn ou() -> OrnsteinUhlenbeck<f64> {
    OrnsteinUhlenbeck {
        horizon: 1.0,
        reward: SdeReward::QUADRATIC,
    }
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn zero_coefficients_keep_the_path_constant() {
    let model = Constant { mu: 0.0, s: 0.0 };
    let grid = TimeGrid::new(0.0, 1.0, 50).unwrap();
    let path = simulate_sde_path(&model, &[0.0], &[1.25], grid, &mut Stream::new(3)).unwrap();
    assert!((0..=50).all(|k| path.state(k) == [1.25]));
}

#[test]
fn constant_drift_is_integrated_exactly() {
    let model = Constant { mu: 1.0, s: 0.0 };
    for steps in [1, 2, 4, 8, 64, 256, 1024] {
        let grid = TimeGrid::new(0.0, 1.0, steps).unwrap();
        let path = simulate_sde_path(&model, &[0.0], &[0.5], grid, &mut Stream::new(1)).unwrap();
        assert_eq!(path.terminal(), [1.5], "steps = {steps}");
    }
}

#[test]
fn ou_terminal_mean() {
    let model = ou();
    let grid = TimeGrid::new(0.0, 1.0, 256).unwrap();
    let terminal: Vec<f64> = (0..100_000u64)
        .map(|r| {
            simulate_sde_path(&model, &[1.0, 0.5], &[1.0], grid, &mut Stream::for_replicate(17, r))
                .unwrap()
                .terminal()[0]
        })
        .collect();
    let (mean, se) = mean_and_se(&terminal);
    let exact = (-1.0f64).exp();
    assert!((mean - exact).abs() < 3.0 * se, "mean {mean} se {se} exact {exact}");
}

#[test]
fn increments_have_variance_dt() {
    let model = Constant { mu: 0.0, s: 1.0 };
    let grid = TimeGrid::new(0.0, 1.0, 16).unwrap();
    let mut all = Vec::new();
    for r in 0..4000u64 {
        let path = simulate_sde_path(&model, &[0.0], &[0.0], grid, &mut Stream::for_replicate(5, r)).unwrap();
        all.extend_from_slice(path.increments());
    }
    let n = all.len() as f64;
    let mean = all.iter().sum::<f64>() / n;
    let var = all.iter().map(|v| v * v).sum::<f64>() / n;
    let dt = 1.0 / 16.0;
    // var of the sample variance of a Gaussian is 2 dt² / n
    assert!(mean.abs() < 4.0 * (dt / n).sqrt());
    assert!((var - dt).abs() < 4.0 * dt * (2.0 / n).sqrt());
}

#[test]
fn paths_are_deterministic_by_seed() {
    let grid = TimeGrid::new(0.0, 1.0, 128).unwrap();
    let a = simulate_sde_path(&ou(), &[1.0, 0.5], &[1.0], grid, &mut Stream::new(99)).unwrap();
    let b = simulate_sde_path(&ou(), &[1.0, 0.5], &[1.0], grid, &mut Stream::new(99)).unwrap();
    assert_eq!(a, b);
    let c = simulate_sde_path(&ou(), &[1.0, 0.5], &[1.0], grid, &mut Stream::new(100)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn state_independent_coefficients_give_trivial_variations() {
    let model = Constant { mu: 0.3, s: 0.7 };
    let grid = TimeGrid::new(0.2, 1.0, 40).unwrap();
    let (_, var) =
        simulate_with_variations(&model, &[0.0], &[0.1], grid, &mut Stream::new(8), VariationOrder::Second).unwrap();
    for k in 0..=40 {
        assert_eq!(var.first(k), [1.0]);
        assert_eq!(var.second(k).unwrap(), [0.0]);
    }
}

#[test]
fn gbm_first_variation_is_x_over_x0() {
    let model = GeometricBrownianMotion {
        horizon: 1.0,
        reward: SdeReward::LINEAR,
    };
    let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
    for (r, x0) in [1.0f64, 2.5, 0.3].into_iter().enumerate() {
        let (path, var) = simulate_with_variations(
            &model,
            &[0.1, 0.2],
            &[x0],
            grid,
            &mut Stream::new(r as u64),
            VariationOrder::First,
        )
        .unwrap();
        for k in 0..=100 {
            let expected = path.state(k)[0] / x0;
            let got = var.first(k)[0];
            // same multiplier on both, up to rounding of the two update forms
            assert!((got - expected).abs() <= 1e-12 * expected.abs(), "{got} vs {expected}");
        }
    }
}

/// `e^{A}` by scaling and squaring of a truncated Taylor series.
fn expm2(a: [f64; 4]) -> [f64; 4] {
    let mul = |p: [f64; 4], q: [f64; 4]| {
        [
            p[0] * q[0] + p[1] * q[2],
            p[0] * q[1] + p[1] * q[3],
            p[2] * q[0] + p[3] * q[2],
            p[2] * q[1] + p[3] * q[3],
        ]
    };
    let scaled = a.map(|v| v / 1024.0);
    let mut term = [1.0, 0.0, 0.0, 1.0];
    let mut sum = term;
    for k in 1..20 {
        term = mul(term, scaled).map(|v| v / k as f64);
        for i in 0..4 {
            sum[i] += term[i];
        }
    }
    for _ in 0..10 {
        sum = mul(sum, sum);
    }
    sum
}

#[test]
fn linear_first_variation_approaches_matrix_exponential() {
    let a = [-1.0, 0.5, -0.3, -0.2];
    let model = Linear2 { a, s: 0.0 };
    let grid = TimeGrid::new(0.25, 1.0, 4096).unwrap();
    let (_, var) = simulate_with_variations(
        &model,
        &[0.0],
        &[1.0, -1.0],
        grid,
        &mut Stream::new(0),
        VariationOrder::First,
    )
    .unwrap();
    let exact = expm2(a.map(|v| v * 0.75));
    let j = var.first(4096);
    let norm = exact.iter().map(|v| v * v).sum::<f64>().sqrt();
    let err = j.iter().zip(&exact).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    assert!(err / norm <= 1e-2, "relative error {}", err / norm);
}

#[test]
fn linear_dynamics_with_linear_reward_have_zero_hessian() {
    let model = Linear2 {
        a: [-1.0, 0.5, -0.3, -0.2],
        s: 0.4,
    };
    let d = estimate_value_derivatives_at(&model, &[0.0], 0.0, &[0.3, 0.1], 50, 32, &Stream::new(4)).unwrap();
    assert_eq!(d.hess, vec![0.0; 4]);
}

#[test]
fn heat_kernel_value_derivatives() {
    let model = Constant { mu: 0.0, s: 1.0 };
    let x = 0.7;
    let d = estimate_value_derivatives_at(&model, &[0.0], 0.25, &[x], 20_000, 64, &Stream::new(12)).unwrap();
    assert!((d.grad[0] - 2.0 * x).abs() < 3.0 * d.grad_stderr[0], "{:?}", d);
    assert_eq!(d.hess, vec![2.0]);
    assert_eq!(d.hess_stderr, vec![0.0]);
}

#[test]
fn ou_value_gradient() {
    let x = 1.0;
    let d = estimate_value_derivatives_at(&ou(), &[1.0, 0.5], 0.0, &[x], 10_000, 256, &Stream::new(21)).unwrap();
    let exact = 2.0 * x * (-2.0f64).exp();
    assert!((d.grad[0] - exact).abs() < 3.0 * d.grad_stderr[0], "{:?} vs {exact}", d);
}

#[test]
fn value_derivatives_agree_with_grid_solution() {
    let theta = [1.0, 0.5];
    let grid = SpaceTimeGrid::new(-6.0, 6.0, 801, 1.0, 801).unwrap();
    let v = solve_feynman_kac_1d(&ou(), &theta, &grid).unwrap();
    let dx = grid.dx();
    let j = 500; // x = 1.5
    let x = grid.x(j);
    let row = v.slice(0);
    let grid_grad = (row[j + 1] - row[j - 1]) / (2.0 * dx);
    let grid_hess = (row[j + 1] - 2.0 * row[j] + row[j - 1]) / (dx * dx);
    let d = estimate_value_derivatives_at(&ou(), &theta, 0.0, &[x], 10_000, 512, &Stream::new(33)).unwrap();
    // grid error is O(dx²) plus the Euler bias of the auxiliary grid
    let tol = 1e-3;
    assert!((d.grad[0] - grid_grad).abs() < 3.0 * d.grad_stderr[0] + tol, "{} vs {grid_grad}", d.grad[0]);
    assert!((d.hess[0] - grid_hess).abs() < 3.0 * d.hess_stderr[0] + tol, "{} vs {grid_hess}", d.hess[0]);

    let bm = DriftedBrownianMotion {
        horizon: 1.0,
        reward: SdeReward::QUADRATIC,
    };
    let v = solve_feynman_kac_1d(&bm, &[0.5], &grid).unwrap();
    let row = v.slice(0);
    let grid_grad = (row[j + 1] - row[j - 1]) / (2.0 * dx);
    let d = estimate_value_derivatives_at(&bm, &[0.5], 0.0, &[x], 10_000, 64, &Stream::new(34)).unwrap();
    assert!((d.grad[0] - grid_grad).abs() < 3.0 * d.grad_stderr[0] + tol);
    assert_eq!(d.hess[0], 2.0);
}

/// Weak error of the OU mean at three step counts, log-log slope near one.
/// Large `x0` and small noise keep the Monte Carlo error far below the bias.
#[test]
fn euler_weak_order_is_one() {
    let model = ou();
    let (theta, x0) = ([1.0, 0.02], 10.0);
    let exact = x0 * (-1.0f64).exp();
    let paths = 100_000u64;
    let mut points = Vec::new();
    for steps in [64usize, 256, 1024] {
        let grid = TimeGrid::new(0.0, 1.0, steps).unwrap();
        let terminal: Vec<f64> = (0..paths)
            .map(|r| {
                simulate_sde_path(&model, &theta, &[x0], grid, &mut Stream::for_replicate(40, r))
                    .unwrap()
                    .terminal()[0]
            })
            .collect();
        let (mean, se) = mean_and_se(&terminal);
        let err = (mean - exact).abs();
        assert!(se < 0.05 * err, "noise {se} too large against bias {err}");
        points.push(((1.0 / steps as f64).ln(), err.ln()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((0.7..=1.3).contains(&slope), "slope {slope}");
}
