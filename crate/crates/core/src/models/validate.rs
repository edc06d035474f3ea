use std::fmt;

use super::crn::CrnModel;
use super::sde::{diffusion_matrix_from_sigma, SdeModel};
use crate::linalg::symmetric_eigenvalues;
use crate::scalar::{all_finite, Scalar};

/// A point `(t, x, θ)` at which model contracts are probed. For reaction
/// networks `X = i64` and `t` is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbePoint<S, X = S> {
    pub t: S,
    pub x: Vec<X>,
    pub theta: Vec<S>,
}

impl<S, X> ProbePoint<S, X> {
    pub fn new(t: S, x: Vec<X>, theta: Vec<S>) -> Self {
        Self { t, x, theta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Shape,
    NonFinite,
    Asymmetric,
    NotPositiveSemidefinite,
    NegativePropensity,
    Admissibility,
    Stoichiometry,
    UndeclaredRewardRate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Index of the probe point, `None` for structural checks.
    pub probe: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.probe {
            Some(p) => write!(f, "{:?} at probe {p}: {}", self.kind, self.message),
            None => write!(f, "{:?}: {}", self.kind, self.message),
        }
    }
}

/// Outcome of [`validate_sde_model`] / [`validate_crn_model`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }

    fn check(&mut self, ok: bool, kind: ViolationKind, probe: Option<usize>, message: impl FnOnce() -> String) -> bool {
        self.checks += 1;
        if !ok {
            self.violations.push(Violation {
                kind,
                probe,
                message: message(),
            });
        }
        ok
    }

    fn shape_and_finite<S: Scalar>(&mut self, what: &str, values: &[S], expected: usize, probe: usize) {
        if self.check(values.len() == expected, ViolationKind::Shape, Some(probe), || {
            format!("{what} has length {}, expected {expected}", values.len())
        }) {
            self.check(all_finite(values), ViolationKind::NonFinite, Some(probe), || {
                format!("{what} has non-finite entries")
            });
        }
    }
}

/// Checks shapes, finiteness, symmetry and positive semidefiniteness of
/// `a = ½σσᵀ` at every probe point.
pub fn validate_sde_model<S: Scalar, M: SdeModel<S> + ?Sized>(
    model: &M,
    probes: &[ProbePoint<S>],
) -> ValidationReport {
    let mut report = ValidationReport::default();
    let (d, w, n) = (model.state_dim(), model.noise_dim(), model.param_count());
    report.check(d >= 1 && w >= 1 && n >= 1, ViolationKind::Shape, None, || {
        format!("dimensions must be positive (d={d}, w={w}, n={n})")
    });
    let horizon = model.horizon();
    report.check(horizon > S::zero() && horizon.is_finite(), ViolationKind::Shape, None, || {
        format!("horizon {horizon} is not positive")
    });
    if !report.passed() {
        return report;
    }

    for (p, probe) in probes.iter().enumerate() {
        let (t, x, theta) = (probe.t, probe.x.as_slice(), probe.theta.as_slice());
        if !report.check(x.len() == d && theta.len() == n, ViolationKind::Shape, Some(p), || {
            format!("probe has |x|={} |θ|={}, model expects {d} and {n}", x.len(), theta.len())
        }) {
            continue;
        }
        report.shape_and_finite("drift", &model.drift(t, x, theta), d, p);
        let sigma = model.diffusion(t, x, theta);
        report.shape_and_finite("diffusion", &sigma, d * w, p);
        report.shape_and_finite("drift jacobian", &model.drift_jacobian(t, x, theta), d * d, p);
        report.shape_and_finite("diffusion jacobian", &model.diffusion_jacobian(t, x, theta), d * w * d, p);
        report.shape_and_finite("drift hessian", &model.drift_hessian(t, x, theta), d * d * d, p);
        report.shape_and_finite("diffusion hessian", &model.diffusion_hessian(t, x, theta), d * w * d * d, p);
        report.shape_and_finite("terminal reward gradient", &model.terminal_reward_gradient(x, theta), d, p);
        report.shape_and_finite("terminal reward hessian", &model.terminal_reward_hessian(x, theta), d * d, p);
        report.shape_and_finite("reward rate gradient", &model.reward_rate_gradient(t, x, theta), d, p);
        report.shape_and_finite("reward rate hessian", &model.reward_rate_hessian(t, x, theta), d * d, p);
        report.shape_and_finite(
            "rewards",
            &[model.terminal_reward(x, theta), model.reward_rate(t, x, theta)],
            2,
            p,
        );
        for i in 0..n {
            report.shape_and_finite("drift parameter derivative", &model.drift_param_derivative(t, x, theta, i), d, p);
            report.shape_and_finite(
                "diffusion parameter derivative",
                &model.diffusion_param_derivative(t, x, theta, i),
                d * w,
                p,
            );
        }
        if !model.has_reward_rate() {
            let rho = model.reward_rate(t, x, theta);
            report.check(rho == S::zero(), ViolationKind::UndeclaredRewardRate, Some(p), || {
                format!("reward rate is {rho} but has_reward_rate() is false")
            });
        }
        if sigma.len() == d * w && all_finite(&sigma) {
            let a = diffusion_matrix_from_sigma(&sigma, d, w);
            let sym = (0..d).all(|r| (0..d).all(|c| a[r * d + c] == a[c * d + r]));
            report.check(sym, ViolationKind::Asymmetric, Some(p), || "diffusion matrix not symmetric".into());
            let min_eig = symmetric_eigenvalues(&a, d)
                .into_iter()
                .fold(S::infinity(), |acc, v| acc.min(v));
            report.check(min_eig >= S::of(-1e-12), ViolationKind::NotPositiveSemidefinite, Some(p), || {
                format!("diffusion matrix has eigenvalue {min_eig}")
            });
        }
    }
    report
}

/// Checks stoichiometry, propensity shapes, nonnegativity and admissibility.
pub fn validate_crn_model<S: Scalar, M: CrnModel<S> + ?Sized>(
    model: &M,
    probes: &[ProbePoint<S, i64>],
) -> ValidationReport {
    let mut report = ValidationReport::default();
    let (d, m, n) = (model.species_count(), model.reaction_count(), model.param_count());
    report.check(d >= 1 && m >= 1 && n >= 1, ViolationKind::Shape, None, || {
        format!("dimensions must be positive (d={d}, m={m}, n={n})")
    });
    let horizon = model.horizon();
    report.check(horizon > S::zero() && horizon.is_finite(), ViolationKind::Shape, None, || {
        format!("horizon {horizon} is not positive")
    });
    for k in 0..m {
        let zeta = model.stoichiometry(k);
        if report.check(zeta.len() == d, ViolationKind::Shape, None, || {
            format!("stoichiometric vector {k} has length {}, expected {d}", zeta.len())
        }) {
            report.check(zeta.iter().any(|&z| z != 0), ViolationKind::Stoichiometry, None, || {
                format!("stoichiometric vector {k} is zero")
            });
        }
    }
    if !report.passed() {
        return report;
    }

    for (p, probe) in probes.iter().enumerate() {
        let (x, theta) = (probe.x.as_slice(), probe.theta.as_slice());
        if !report.check(
            x.len() == d && theta.len() == n && x.iter().all(|&c| c >= 0),
            ViolationKind::Shape,
            Some(p),
            || format!("probe state {x:?} / |θ|={} invalid for d={d}, n={n}", theta.len()),
        ) {
            continue;
        }
        let lambda = model.propensities(x, theta);
        report.shape_and_finite("propensities", &lambda, m, p);
        for i in 0..n {
            report.shape_and_finite(
                "propensity parameter derivative",
                &model.propensity_param_derivative(x, theta, i),
                m,
                p,
            );
        }
        if lambda.len() != m {
            continue;
        }
        for (k, &rate) in lambda.iter().enumerate() {
            report.check(rate >= S::zero(), ViolationKind::NegativePropensity, Some(p), || {
                format!("propensity {k} is {rate}")
            });
            if rate > S::zero() {
                let lands_inside = x.iter().zip(model.stoichiometry(k)).all(|(&xi, &z)| xi + z >= 0);
                report.check(lands_inside, ViolationKind::Admissibility, Some(p), || {
                    format!("reaction {k} fires at rate {rate} but would leave the orthant")
                });
            }
        }
    }
    report
}
