use gengrad::models::{RunningReward, TerminalReward};
use gengrad::{
    check_adjoint_identity, solve_feynman_kac_1d, solve_fokker_planck_1d, solve_master_equation_value_and_gradient,
    CrnModel, CrnReward, DriftedBrownianMotion, Error, MassActionNetwork, OrnsteinUhlenbeck, Reaction, SdeModel,
    SdeReward, SpaceTimeGrid,
};

/// `dX = s dB` with no θ dependence, `ρ = rate`, and `g` either zero or `exp(−x²/2)`.
struct Heat {
    s: f64,
    rate: f64,
    gaussian: bool,
}

impl SdeModel<f64> for Heat {
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
        vec![0.0]
    }
    fn diffusion(&self, _t: f64, _x: &[f64], _th: &[f64]) -> Vec<f64> {
        vec![self.s]
    }
    fn terminal_reward(&self, x: &[f64], _th: &[f64]) -> f64 {
        if self.gaussian {
            (-0.5 * x[0] * x[0]).exp()
        } else {
            0.0
        }
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
    fn terminal_reward_gradient(&self, _x: &[f64], _th: &[f64]) -> Vec<f64> {
        unimplemented!("grid solvers do not use it")
    }
    fn terminal_reward_hessian(&self, _x: &[f64], _th: &[f64]) -> Vec<f64> {
        unimplemented!("grid solvers do not use it")
    }
    fn has_reward_rate(&self) -> bool {
        self.rate != 0.0
    }
    fn reward_rate(&self, _t: f64, _x: &[f64], _th: &[f64]) -> f64 {
        self.rate
    }
}

fn ou() -> OrnsteinUhlenbeck<f64> {
    OrnsteinUhlenbeck {
        horizon: 1.0,
        reward: SdeReward::QUADRATIC,
    }
}

fn grid(n: usize) -> SpaceTimeGrid<f64> {
    SpaceTimeGrid::<f64>::new(-6.0, 6.0, n, 1.0, n).unwrap()
}

#[test]
fn constant_reward_rate_gives_time_to_go() {
    let model = Heat {
        s: 0.8,
        rate: 1.0,
        gaussian: false,
    };
    let g = SpaceTimeGrid::<f64>::new(-3.0, 3.0, 61, 1.0, 41).unwrap();
    let v = solve_feynman_kac_1d(&model, &[0.0], &g).unwrap();
    for n in 0..g.nt {
        for &value in v.slice(n) {
            assert!((value - (1.0 - g.t(n))).abs() < 1e-12);
        }
    }
}

#[test]
fn heat_equation_with_distant_boundaries() {
    // v = x² + (T − t); the zero-curvature boundary is wrong for x², so it is
    // placed far enough away that its influence on |x| ≤ 3 is negligible
    let model = DriftedBrownianMotion {
        horizon: 1.0,
        reward: SdeReward {
            terminal: TerminalReward::Quadratic,
            running: RunningReward::None,
        },
    };
    let g = SpaceTimeGrid::<f64>::new(-8.0, 8.0, 401, 1.0, 401).unwrap();
    let v = solve_feynman_kac_1d(&model, &[0.0], &g).unwrap();
    for n in [0, 200, 400] {
        for j in 0..g.nx {
            let x = g.x(j);
            if x.abs() <= 3.0 {
                let exact = x * x + 1.0 - g.t(n);
                assert!((v.slice(n)[j] - exact).abs() <= 1e-4, "t {} x {x}", g.t(n));
            }
        }
    }
}

#[test]
fn ou_value_function() {
    let g = grid(401);
    let v = solve_feynman_kac_1d(&ou(), &[1.0, 0.5], &g).unwrap();
    let e = (-2.0f64).exp();
    for j in 0..g.nx {
        let x = g.x(j);
        if x.abs() <= 3.0 {
            let exact = x * x * e + 0.25 * (1.0 - e) / 2.0;
            assert!((v.slice(0)[j] - exact).abs() <= 1e-3);
        }
    }
}

fn gaussian_heat_error(n: usize) -> f64 {
    // g = exp(−x²/2), a = ½: v(0, x) = exp(−x² / (2(1 + T))) / √(1 + T)
    let model = Heat {
        s: 1.0,
        rate: 0.0,
        gaussian: true,
    };
    let g = SpaceTimeGrid::<f64>::new(-8.0, 8.0, n, 1.0, n).unwrap();
    let v = solve_feynman_kac_1d(&model, &[0.0], &g).unwrap();
    (0..g.nx)
        .map(|j| {
            let x = g.x(j);
            let exact = (-x * x / 4.0).exp() / 2f64.sqrt();
            (v.slice(0)[j] - exact).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn crank_nicolson_converges_at_second_order() {
    let (coarse, fine) = (gaussian_heat_error(201), gaussian_heat_error(401));
    assert!(coarse / fine >= 3.0, "{coarse:.3e} -> {fine:.3e}");
}

#[test]
fn density_conserves_mass_and_stays_nonnegative() {
    let g = grid(401);
    let p = solve_fokker_planck_1d(&ou(), &[1.0, 0.5], 1.0, &g).unwrap();
    for n in 0..g.nt {
        assert!((p.mass(n) - 1.0).abs() <= 1e-6);
        assert!(p.slice(n).iter().all(|&v| v >= -1e-10));
    }
}

#[test]
fn brownian_density_moments() {
    let model = Heat {
        s: 1.0,
        rate: 0.0,
        gaussian: false,
    };
    let g = grid(401);
    let x0 = 0.3;
    let p = solve_fokker_planck_1d(&model, &[0.0], x0, &g).unwrap();
    let mollifier = (2.0 * g.dx()).powi(2);
    for n in [0, 100, 400] {
        assert!((p.mean(n) - x0).abs() <= 1e-3);
        assert!((p.variance(n) - (g.t(n) + mollifier)).abs() <= 1e-3);
    }
}

#[test]
fn ou_density_mean() {
    let g = grid(401);
    let p = solve_fokker_planck_1d(&ou(), &[1.0, 0.5], 1.0, &g).unwrap();
    for n in 0..g.nt {
        assert!((p.mean(n) - (-g.t(n)).exp()).abs() <= 1e-3);
    }
}

#[test]
fn adjoint_identity_is_trivial_without_parameters() {
    let model = Heat {
        s: 0.7,
        rate: 0.0,
        gaussian: true,
    };
    let report = check_adjoint_identity(&model, &[0.0], 0, 0.2, &grid(201), 1e-4).unwrap();
    assert!(report.lhs.abs() <= 1e-8 && report.rhs.abs() <= 1e-8, "{report:?}");
}

#[test]
fn adjoint_identity_on_drifted_bm() {
    let model = DriftedBrownianMotion {
        horizon: 1.0,
        reward: SdeReward::LINEAR,
    };
    let report = check_adjoint_identity(&model, &[0.5], 0, 0.0, &grid(401), 1e-4).unwrap();
    assert!((report.lhs - 1.0).abs() <= 1e-6);
    assert!((report.rhs_terms[0] - 1.0).abs() <= 1e-3);
    assert!(report.abs_gap <= 1e-3);
    assert_eq!(report.abs_gap, (report.lhs - report.rhs).abs());
}

#[test]
fn adjoint_gap_on_ou_shrinks_under_refinement() {
    let coarse = check_adjoint_identity(&ou(), &[1.0, 0.5], 0, 1.0, &grid(401), 1e-4).unwrap();
    let fine = check_adjoint_identity(&ou(), &[1.0, 0.5], 0, 1.0, &grid(801), 1e-4).unwrap();
    assert!(coarse.abs_gap <= 5e-3, "{coarse:?}");
    assert!(fine.abs_gap <= 0.5 * coarse.abs_gap, "{} -> {}", coarse.abs_gap, fine.abs_gap);
    let json = serde_json::to_value(&coarse).unwrap();
    assert_eq!(json["rhs_terms"].as_array().unwrap().len(), 3);
}

/// One species, one reaction with zero rate and zero sensitivity.
struct Silent;

impl CrnModel<f64> for Silent {
    fn species_count(&self) -> usize {
        1
    }
    fn reaction_count(&self) -> usize {
        1
    }
    fn param_count(&self) -> usize {
        1
    }
    fn horizon(&self) -> f64 {
        1.0
    }
    fn stoichiometry(&self, _k: usize) -> &[i64] {
        &[1]
    }
    fn propensities(&self, _x: &[i64], _theta: &[f64]) -> Vec<f64> {
        vec![0.0]
    }
    fn propensity_param_derivative(&self, _x: &[i64], _theta: &[f64], _i: usize) -> Vec<f64> {
        vec![0.0]
    }
    fn terminal_reward(&self, x: &[i64]) -> f64 {
        (x[0] * x[0]) as f64
    }
}

fn pure_birth() -> MassActionNetwork<f64> {
    MassActionNetwork::new(1, 1, 1.0, CrnReward::Linear { species: 0 })
        .unwrap()
        .with_reaction(Reaction::new(&[0], &[1], 0))
        .unwrap()
}

fn birth_death() -> MassActionNetwork<f64> {
    MassActionNetwork::new(1, 2, 2.0, CrnReward::Linear { species: 0 })
        .unwrap()
        .with_reaction(Reaction::new(&[0], &[1], 0))
        .unwrap()
        .with_reaction(Reaction::new(&[1], &[0], 1))
        .unwrap()
}

#[test]
fn silent_network_keeps_its_value() {
    let sol = solve_master_equation_value_and_gradient(&Silent, &[1.0], &[3], &[10]).unwrap();
    assert_eq!(sol.value, 9.0);
    assert_eq!(sol.gradient, vec![0.0]);
}

#[test]
fn pure_birth_master_equation() {
    let sol = solve_master_equation_value_and_gradient(&pure_birth(), &[2.0], &[4], &[200]).unwrap();
    assert!((sol.value - 6.0).abs() <= 1e-6);
    assert!((sol.gradient[0] - 1.0).abs() <= 1e-6);
}

#[test]
fn birth_death_master_equation() {
    let sol = solve_master_equation_value_and_gradient(&birth_death(), &[10.0, 1.0], &[0], &[400]).unwrap();
    let e = (-2.0f64).exp();
    assert!((sol.value - 10.0 * (1.0 - e)).abs() <= 1e-6);
    assert!((sol.gradient[0] - (1.0 - e)).abs() <= 1e-6);
    assert!((sol.gradient[1] - (-10.0 * (1.0 - e) + 20.0 * e)).abs() <= 1e-6);
}

#[test]
fn tight_truncation_is_rejected() {
    let err = solve_master_equation_value_and_gradient(&birth_death(), &[10.0, 1.0], &[0], &[12]).unwrap_err();
    assert!(matches!(err, Error::Truncation { .. }), "{err:?}");
    let err = solve_master_equation_value_and_gradient(&birth_death(), &[10.0, 1.0], &[0], &[300_000]).unwrap_err();
    assert!(matches!(err, Error::StateSpaceTooLarge { .. }), "{err:?}");
}
