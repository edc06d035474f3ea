use gengrad::models::{
    builtin_model, default_parameters, diffusion_matrix, validate_crn_model, validate_sde_model, BuiltinModel,
    BuiltinOptions, ProbePoint, RunningReward, SdeReward, TerminalReward, BUILTIN_IDS,
};
use gengrad::{CrnModel, SdeModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-4;
const TOL: f64 = 1e-5;
const PROBES: usize = 100;

fn close(analytic: f64, numeric: f64) -> bool {
    (analytic - numeric).abs() <= TOL * analytic.abs().max(numeric.abs()).max(1.0)
}

fn assert_close(what: &str, id: &str, analytic: &[f64], numeric: &[f64]) {
    assert_eq!(analytic.len(), numeric.len(), "{id} {what}: length");
    for (k, (a, n)) in analytic.iter().zip(numeric).enumerate() {
        assert!(close(*a, *n), "{id} {what}[{k}]: analytic {a} vs central difference {n}");
    }
}

fn central<F: Fn(f64) -> Vec<f64>>(f: F, at: f64) -> Vec<f64> {
    let (p, m) = (f(at + H), f(at - H));
    p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * H)).collect()
}

fn bumped(v: &[f64], k: usize, by: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    out[k] += by;
    out
}

/// Central differences of `f(x)` in each state coordinate, laid out `[out][b]`.
fn jacobian_fd<F: Fn(&[f64]) -> Vec<f64>>(f: F, x: &[f64]) -> Vec<f64> {
    let d = x.len();
    let cols: Vec<Vec<f64>> = (0..d)
        .map(|b| {
            let (p, m) = (f(&bumped(x, b, H)), f(&bumped(x, b, -H)));
            p.iter().zip(&m).map(|(a, c)| (a - c) / (2.0 * H)).collect()
        })
        .collect();
    let rows = cols[0].len();
    let mut out = vec![0.0; rows * d];
    for r in 0..rows {
        for b in 0..d {
            out[r * d + b] = cols[b][r];
        }
    }
    out
}

fn check_sde(id: &str, model: &dyn SdeModel<f64>, rng: &mut ChaCha8Rng) {
    let n = model.param_count();
    let d = model.state_dim();
    for _ in 0..PROBES {
        let t = rng.random_range(0.0..model.horizon());
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let theta: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.5)).collect();

        for i in 0..n {
            let at = theta[i];
            let with = |v: f64| bumped(&theta, i, v - at);
            assert_close(
                "drift_param_derivative",
                id,
                &model.drift_param_derivative(t, &x, &theta, i),
                &central(|v| model.drift(t, &x, &with(v)), at),
            );
            assert_close(
                "diffusion_param_derivative",
                id,
                &model.diffusion_param_derivative(t, &x, &theta, i),
                &central(|v| model.diffusion(t, &x, &with(v)), at),
            );
            assert_close(
                "terminal_reward_param_derivative",
                id,
                &[model.terminal_reward_param_derivative(&x, &theta, i)],
                &central(|v| vec![model.terminal_reward(&x, &with(v))], at),
            );
            assert_close(
                "reward_rate_param_derivative",
                id,
                &[model.reward_rate_param_derivative(t, &x, &theta, i)],
                &central(|v| vec![model.reward_rate(t, &x, &with(v))], at),
            );
        }
        assert_close(
            "drift_jacobian",
            id,
            &model.drift_jacobian(t, &x, &theta),
            &jacobian_fd(|y| model.drift(t, y, &theta), &x),
        );
        assert_close(
            "diffusion_jacobian",
            id,
            &model.diffusion_jacobian(t, &x, &theta),
            &jacobian_fd(|y| model.diffusion(t, y, &theta), &x),
        );
        assert_close(
            "drift_hessian",
            id,
            &model.drift_hessian(t, &x, &theta),
            &jacobian_fd(|y| model.drift_jacobian(t, y, &theta), &x),
        );
        assert_close(
            "diffusion_hessian",
            id,
            &model.diffusion_hessian(t, &x, &theta),
            &jacobian_fd(|y| model.diffusion_jacobian(t, y, &theta), &x),
        );
        assert_close(
            "terminal_reward_gradient",
            id,
            &model.terminal_reward_gradient(&x, &theta),
            &jacobian_fd(|y| vec![model.terminal_reward(y, &theta)], &x),
        );
        assert_close(
            "terminal_reward_hessian",
            id,
            &model.terminal_reward_hessian(&x, &theta),
            &jacobian_fd(|y| model.terminal_reward_gradient(y, &theta), &x),
        );
        assert_close(
            "reward_rate_gradient",
            id,
            &model.reward_rate_gradient(t, &x, &theta),
            &jacobian_fd(|y| vec![model.reward_rate(t, y, &theta)], &x),
        );
        assert_close(
            "reward_rate_hessian",
            id,
            &model.reward_rate_hessian(t, &x, &theta),
            &jacobian_fd(|y| model.reward_rate_gradient(t, y, &theta), &x),
        );
    }
}

fn check_crn(id: &str, model: &dyn CrnModel<f64>, rng: &mut ChaCha8Rng) {
    let n = model.param_count();
    for _ in 0..PROBES {
        let x: Vec<i64> = (0..model.species_count()).map(|_| rng.random_range(0..30)).collect();
        let theta: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..5.0)).collect();
        for i in 0..n {
            let at = theta[i];
            assert_close(
                "propensity_param_derivative",
                id,
                &model.propensity_param_derivative(&x, &theta, i),
                &central(|v| model.propensities(&x, &bumped(&theta, i, v - at)), at),
            );
        }
    }
}

#[test]
fn supplied_derivatives_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let rewards = [
        SdeReward::LINEAR,
        SdeReward::QUADRATIC,
        SdeReward {
            terminal: TerminalReward::Quadratic,
            running: RunningReward::Quadratic,
        },
    ];
    for id in BUILTIN_IDS {
        let n_features = (id == "feature-drift").then_some(9);
        let probe = builtin_model::<f64>(
            id,
            &BuiltinOptions {
                n_features,
                ..Default::default()
            },
        )
        .unwrap();
        match probe {
            BuiltinModel::Sde(_) => {
                for reward in rewards {
                    let options = BuiltinOptions {
                        n_features,
                        sde_reward: Some(reward),
                        ..Default::default()
                    };
                    let BuiltinModel::Sde(model) = builtin_model::<f64>(id, &options).unwrap() else {
                        unreachable!()
                    };
                    check_sde(id, model.as_ref(), &mut rng);
                }
            }
            BuiltinModel::Crn(model) => check_crn(id, model.as_ref(), &mut rng),
        }
    }
}

#[test]
fn builtins_pass_validation_at_their_defaults() {
    for id in BUILTIN_IDS {
        let (theta, x0) = default_parameters(id, None).unwrap();
        match builtin_model::<f64>(id, &BuiltinOptions::default()).unwrap() {
            BuiltinModel::Sde(model) => {
                let probes: Vec<_> = [-1.0, 0.0, 0.5, 2.0]
                    .iter()
                    .map(|&x| ProbePoint::new(0.3, vec![x; x0.len()], theta.clone()))
                    .collect();
                let report = validate_sde_model(model.as_ref(), &probes);
                assert!(report.passed(), "{id}: {:?}", report.first_violation());
            }
            BuiltinModel::Crn(model) => {
                let probes: Vec<_> = [0, 1, 7]
                    .iter()
                    .map(|&x| ProbePoint::new(0.0, vec![x; x0.len()], theta.clone()))
                    .collect();
                let report = validate_crn_model(model.as_ref(), &probes);
                assert!(report.passed(), "{id}: {:?}", report.first_violation());
            }
        }
    }
}

proptest! {
    #[test]
    fn diffusion_matrix_is_symmetric_psd(
        x in -3.0f64..3.0,
        t in 0.0f64..1.0,
        th1 in -2.0f64..2.0,
        th2 in -2.0f64..2.0,
    ) {
        for id in ["drifted-bm", "ou", "gbm", "feature-drift"] {
            let BuiltinModel::Sde(model) = builtin_model::<f64>(id, &BuiltinOptions::default()).unwrap() else {
                unreachable!()
            };
            let mut theta = vec![th1; model.param_count()];
            if theta.len() > 1 {
                theta[1] = th2;
            }
            let a = diffusion_matrix(model.as_ref(), t, &[x], &theta).unwrap();
            let d = model.state_dim();
            for r in 0..d {
                for c in 0..d {
                    prop_assert_eq!(a[r * d + c], a[c * d + r]);
                }
            }
            let eig = gengrad::linalg::symmetric_eigenvalues(&a, d);
            prop_assert!(eig.iter().all(|&e| e >= -1e-12));
        }
    }
}
