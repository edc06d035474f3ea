use serde::Serialize;

use crate::error::Result;
use crate::estimators::{estimate_crn, estimate_sde, sde_samples, EstimatorConfig, EstimatorId};
use crate::models::{DriftedBrownianMotion, MassActionNetwork, OrnsteinUhlenbeck, Reaction, SdeReward};
use crate::models::{CrnReward, RunningReward, TerminalReward};
use crate::oracle::{
    check_adjoint_identity, solve_feynman_kac_1d, solve_fokker_planck_1d, solve_master_equation_value_and_gradient,
    SpaceTimeGrid,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfTestOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, check: Result<(bool, String)>) -> SelfTestOutcome {
    match check {
        Ok((passed, detail)) => SelfTestOutcome { name, passed, detail },
        Err(e) => SelfTestOutcome {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Oracle and closed-form checks, sized to finish in seconds.
pub fn selftest() -> Vec<SelfTestOutcome> {
    vec![
        outcome("feynman-kac heat equation", heat_equation()),
        outcome("fokker-planck mass", fokker_planck_mass()),
        outcome("master equation birth-death", master_birth_death()),
        outcome("adjoint identity drifted-bm", adjoint_drifted_bm()),
        outcome("gge zero variance", gge_zero_variance()),
        outcome("gge ou closed form", gge_ou()),
        outcome("eipa pure birth", eipa_pure_birth()),
        outcome("eipa birth-death closed form", eipa_birth_death()),
    ]
}

fn quadratic_bm() -> DriftedBrownianMotion<f64> {
    DriftedBrownianMotion {
        horizon: 1.0,
        reward: SdeReward {
            terminal: TerminalReward::Quadratic,
            running: RunningReward::None,
        },
    }
}

// v(t, x) = x² + (T − t) for dX = dB, g = x².
fn heat_equation() -> Result<(bool, String)> {
    let grid = SpaceTimeGrid::new(-8.0, 8.0, 401, 1.0, 401)?;
    let sol = solve_feynman_kac_1d(&quadratic_bm(), &[0.0], &grid)?;
    let mut worst = 0.0f64;
    for j in 0..grid.nx {
        let x = grid.x(j);
        if x.abs() <= 3.0 {
            worst = worst.max((sol.slice(0)[j] - (x * x + 1.0)).abs());
        }
    }
    Ok((worst <= 1e-4, format!("max |error| on |x|<=3: {worst:.3e}")))
}

fn fokker_planck_mass() -> Result<(bool, String)> {
    let ou = OrnsteinUhlenbeck {
        horizon: 1.0,
        reward: SdeReward::QUADRATIC,
    };
    let grid = SpaceTimeGrid::new(-6.0, 6.0, 401, 1.0, 401)?;
    let p = solve_fokker_planck_1d(&ou, &[1.0f64, 0.5], 1.0, &grid)?;
    let worst = (0..grid.nt).map(|n| (p.mass(n) - 1.0f64).abs()).fold(0.0, f64::max);
    Ok((worst <= 1e-6, format!("max |mass - 1|: {worst:.3e}")))
}

fn birth_death() -> Result<MassActionNetwork<f64>> {
    MassActionNetwork::new(1, 2, 2.0, CrnReward::Linear { species: 0 })?
        .with_reaction(Reaction::new(&[0], &[1], 0))?
        .with_reaction(Reaction::new(&[1], &[0], 1))
}

// E X(T) = (a/b)(1 − e^{−bT}) from x0 = 0.
fn birth_death_closed_form(a: f64, b: f64, t: f64) -> (f64, [f64; 2]) {
    let e = (-b * t).exp();
    (a / b * (1.0 - e), [(1.0 - e) / b, -a / (b * b) * (1.0 - e) + a / b * t * e])
}

fn master_birth_death() -> Result<(bool, String)> {
    let sol = solve_master_equation_value_and_gradient(&birth_death()?, &[10.0, 1.0], &[0], &[80])?;
    let (v, g) = birth_death_closed_form(10.0, 1.0, 2.0);
    let err = (sol.value - v)
        .abs()
        .max((sol.gradient[0] - g[0]).abs())
        .max((sol.gradient[1] - g[1]).abs());
    Ok((err <= 1e-6, format!("max |error|: {err:.3e}")))
}

fn adjoint_drifted_bm() -> Result<(bool, String)> {
    let model = DriftedBrownianMotion {
        horizon: 1.0,
        reward: SdeReward::QUADRATIC,
    };
    let grid = SpaceTimeGrid::new(-8.0, 8.0, 401, 1.0, 401)?;
    let report = check_adjoint_identity(&model, &[0.5], 0, 0.0, &grid, 1e-4)?;
    Ok((report.abs_gap <= 1e-3, format!("lhs {:.6} rhs {:.6} gap {:.3e}", report.lhs, report.rhs, report.abs_gap)))
}

fn gge_zero_variance() -> Result<(bool, String)> {
    let model = DriftedBrownianMotion {
        horizon: 1.0,
        reward: SdeReward::LINEAR,
    };
    let config = EstimatorConfig {
        n_samples: 200,
        steps_main: 32,
        seed: 7,
        ..EstimatorConfig::default()
    };
    let samples = sde_samples(EstimatorId::GeneratorGradient, &model, &[0.5], &[0.0], &config)?;
    let exact = samples.iter().all(|s| s[0] == 1.0);
    Ok((exact, format!("{} replicates, all exactly 1: {exact}", samples.len())))
}

fn within(mean: f64, stderr: f64, target: f64, k: f64) -> bool {
    (mean - target).abs() <= k * stderr
}

fn gge_ou() -> Result<(bool, String)> {
    let ou = OrnsteinUhlenbeck {
        horizon: 1.0,
        reward: SdeReward::QUADRATIC,
    };
    let config = EstimatorConfig {
        n_samples: 2000,
        steps_main: 128,
        seed: 11,
        ..EstimatorConfig::default()
    };
    let est = estimate_sde(EstimatorId::GeneratorGradient, &ou, &[1.0, 0.5], &[1.0], &config)?;
    let (a, s, t, x0) = (1.0f64, 0.5f64, 1.0f64, 1.0f64);
    let e = (-2.0 * a * t).exp();
    let target = [
        -2.0 * t * x0 * x0 * e + s * s * (t * e / a - (1.0 - e) / (2.0 * a * a)),
        s * (1.0 - e) / a,
    ];
    let ok = (0..2).all(|i| within(est.mean[i], est.stderr[i], target[i], 3.0));
    Ok((ok, format!("mean {:?} stderr {:?} target {:?}", est.mean, est.stderr, target)))
}

fn eipa_pure_birth() -> Result<(bool, String)> {
    let model = MassActionNetwork::new(1, 1, 1.5, CrnReward::Linear { species: 0 })?
        .with_reaction(Reaction::new(&[0], &[1], 0))?;
    let config = EstimatorConfig {
        n_samples: 200,
        seed: 5,
        ..EstimatorConfig::default()
    };
    let samples = crate::estimators::crn_samples(EstimatorId::Eipa, &model, &[2.0], &[0], &config)?;
    let exact = samples.iter().all(|s| s[0] == 1.5);
    Ok((exact, format!("{} replicates, all exactly T: {exact}", samples.len())))
}

fn eipa_birth_death() -> Result<(bool, String)> {
    let config = EstimatorConfig {
        n_samples: 2000,
        seed: 13,
        ..EstimatorConfig::default()
    };
    let est = estimate_crn(EstimatorId::Eipa, &birth_death()?, &[10.0, 1.0], &[0], &config)?;
    let (_, target) = birth_death_closed_form(10.0, 1.0, 2.0);
    let ok = (0..2).all(|i| within(est.mean[i], est.stderr[i], target[i], 3.0));
    Ok((ok, format!("mean {:?} stderr {:?} target {:?}", est.mean, est.stderr, target)))
}
