use crate::error::{check_len, Error, Result};
use crate::models::CrnModel;
use crate::scalar::Scalar;

/// Upper bound on the number of enumerated states.
pub const MAX_TRUNCATED_STATES: usize = 200_000;

/// Boundary probability mass above which the truncation is rejected.
const BOUNDARY_MASS_TOLERANCE: f64 = 1e-6;

/// RK4 step is `STEP_FRACTION / max exit rate`.
const STEP_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct MasterEquationSolution<S> {
    /// `v(0, x0) = E[g(X(T))]`.
    pub value: S,
    /// `∂θ v(0, x0)`.
    pub gradient: Vec<S>,
    /// Largest probability found on the truncation boundary over `[0, T]`.
    pub boundary_mass: S,
    pub states: usize,
    pub steps: usize,
}

/// One retained transition `from → to` at rate `λ_k(from)`.
struct Transition<S> {
    from: usize,
    to: usize,
    rate: S,
    /// `∂θi λ_k(from)` for every parameter.
    rate_derivative: Vec<S>,
}

struct StateSpace {
    caps: Vec<i64>,
    strides: Vec<usize>,
    len: usize,
}

impl StateSpace {
    fn new(caps: &[i64]) -> Result<Self> {
        let mut strides = Vec::with_capacity(caps.len());
        let mut len: usize = 1;
        for &cap in caps {
            if cap < 0 {
                return Err(Error::Config(format!("truncation cap {cap} is negative")));
            }
            strides.push(len);
            len = len
                .checked_mul(cap as usize + 1)
                .filter(|&l| l <= MAX_TRUNCATED_STATES)
                .ok_or(Error::StateSpaceTooLarge {
                    states: usize::MAX,
                    limit: MAX_TRUNCATED_STATES,
                })?;
        }
        Ok(Self {
            caps: caps.to_vec(),
            strides,
            len,
        })
    }

    fn index(&self, x: &[i64]) -> Option<usize> {
        let mut idx = 0;
        for ((&xi, &cap), &stride) in x.iter().zip(&self.caps).zip(&self.strides) {
            if xi < 0 || xi > cap {
                return None;
            }
            idx += xi as usize * stride;
        }
        Some(idx)
    }

    fn state(&self, mut idx: usize) -> Vec<i64> {
        self.caps
            .iter()
            .map(|&cap| {
                let base = cap as usize + 1;
                let v = idx % base;
                idx /= base;
                v as i64
            })
            .collect()
    }

    fn on_boundary(&self, x: &[i64]) -> bool {
        x.iter().zip(&self.caps).any(|(&xi, &cap)| xi == cap)
    }
}

/// `out = L f` with `L f(x) = Σ_k λ_k(x) (f(x + ζ_k) − f(x))`.
fn apply_generator<S: Scalar>(transitions: &[Transition<S>], f: &[S], out: &mut [S]) {
    out.iter_mut().for_each(|v| *v = S::zero());
    for tr in transitions {
        out[tr.from] += tr.rate * (f[tr.to] - f[tr.from]);
    }
}

/// `out += (∂θi L) f`.
fn add_generator_derivative<S: Scalar>(transitions: &[Transition<S>], i: usize, f: &[S], out: &mut [S]) {
    for tr in transitions {
        out[tr.from] += tr.rate_derivative[i] * (f[tr.to] - f[tr.from]);
    }
}

/// `out = Lᵀ p`, the forward master-equation right-hand side.
fn apply_forward<S: Scalar>(transitions: &[Transition<S>], p: &[S], out: &mut [S]) {
    out.iter_mut().for_each(|v| *v = S::zero());
    for tr in transitions {
        let flow = tr.rate * p[tr.from];
        out[tr.to] += flow;
        out[tr.from] -= flow;
    }
}

/// Exact value and parameter gradient of `E[g(X(T))]` on a truncated state
/// space `0 ≤ x_s ≤ caps[s]`.
///
/// Transitions that would leave the truncation are dropped. The backward
/// equation `v' = L v` and its sensitivities `w_i' = L w_i + (∂θi L) v` are
/// integrated in time-to-go with classical RK4, alongside the forward
/// equation from `δ_{x0}` to monitor the mass on the truncation boundary.
pub fn solve_master_equation_value_and_gradient<S: Scalar, M: CrnModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    x0: &[i64],
    caps: &[i64],
) -> Result<MasterEquationSolution<S>> {
    let (d, m, n) = (model.species_count(), model.reaction_count(), model.param_count());
    check_len("initial state", x0.len(), d)?;
    check_len("truncation caps", caps.len(), d)?;
    check_len("parameter vector", theta.len(), n)?;
    let space = StateSpace::new(caps)?;
    let start = space
        .index(x0)
        .ok_or_else(|| Error::Config(format!("initial state {x0:?} outside truncation {caps:?}")))?;

    let mut transitions = Vec::new();
    let mut rewards = Vec::with_capacity(space.len);
    let mut boundary = Vec::new();
    let mut max_exit = S::zero();
    for idx in 0..space.len {
        let x = space.state(idx);
        rewards.push(model.terminal_reward(&x));
        if space.on_boundary(&x) {
            boundary.push(idx);
        }
        let lambda = model.propensities(&x, theta);
        check_len("propensities", lambda.len(), m)?;
        let d_lambda: Vec<Vec<S>> = (0..n)
            .map(|i| {
                let v = model.propensity_param_derivative(&x, theta, i);
                check_len("propensity parameter derivative", v.len(), m).map(|_| v)
            })
            .collect::<Result<_>>()?;
        let mut exit = S::zero();
        for k in 0..m {
            if !(lambda[k] >= S::zero()) {
                return Err(Error::NegativePropensity {
                    reaction: k,
                    value: lambda[k].to_f64_lossy(),
                });
            }
            let target: Vec<i64> = x.iter().zip(model.stoichiometry(k)).map(|(a, z)| a + z).collect();
            let Some(to) = space.index(&target) else {
                continue;
            };
            let rate_derivative: Vec<S> = d_lambda.iter().map(|row| row[k]).collect();
            if lambda[k] == S::zero() && rate_derivative.iter().all(|v| *v == S::zero()) {
                continue;
            }
            exit += lambda[k];
            transitions.push(Transition {
                from: idx,
                to,
                rate: lambda[k],
                rate_derivative,
            });
        }
        max_exit = max_exit.max(exit);
    }

    let horizon = model.horizon();
    let steps = if max_exit > S::zero() {
        (horizon * max_exit / S::of(STEP_FRACTION)).ceil().to_usize().unwrap_or(1).max(1)
    } else {
        1
    };
    let h = horizon / S::of_usize(steps);

    // blocks: [v, w_0, …, w_{n−1}, p]
    let len = space.len;
    let blocks = n + 2;
    let mut y = vec![S::zero(); blocks * len];
    y[..len].copy_from_slice(&rewards);
    y[(n + 1) * len + start] = S::one();

    let rhs = |y: &[S], out: &mut [S]| {
        let (v, rest) = y.split_at(len);
        let (out_v, out_rest) = out.split_at_mut(len);
        apply_generator(&transitions, v, out_v);
        for i in 0..n {
            let w = &rest[i * len..(i + 1) * len];
            let out_w = &mut out_rest[i * len..(i + 1) * len];
            apply_generator(&transitions, w, out_w);
            add_generator_derivative(&transitions, i, v, out_w);
        }
        apply_forward(&transitions, &rest[n * len..], &mut out_rest[n * len..]);
    };

    let boundary_mass = |y: &[S]| -> S { boundary.iter().map(|&b| y[(n + 1) * len + b]).sum() };
    let mut worst_boundary = boundary_mass(&y);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![S::zero(); y.len()],
        vec![S::zero(); y.len()],
        vec![S::zero(); y.len()],
        vec![S::zero(); y.len()],
        vec![S::zero(); y.len()],
    );
    let half = S::of(0.5);
    let sixth = h / S::of(6.0);
    for _ in 0..steps {
        rhs(&y, &mut k1);
        for j in 0..y.len() {
            tmp[j] = y[j] + half * h * k1[j];
        }
        rhs(&tmp, &mut k2);
        for j in 0..y.len() {
            tmp[j] = y[j] + half * h * k2[j];
        }
        rhs(&tmp, &mut k3);
        for j in 0..y.len() {
            tmp[j] = y[j] + h * k3[j];
        }
        rhs(&tmp, &mut k4);
        for j in 0..y.len() {
            y[j] += sixth * (k1[j] + S::of(2.0) * (k2[j] + k3[j]) + k4[j]);
        }
        worst_boundary = worst_boundary.max(boundary_mass(&y));
    }

    if worst_boundary.to_f64_lossy() > BOUNDARY_MASS_TOLERANCE {
        return Err(Error::Truncation {
            mass: worst_boundary.to_f64_lossy(),
            tolerance: BOUNDARY_MASS_TOLERANCE,
        });
    }
    Ok(MasterEquationSolution {
        value: y[start],
        gradient: (0..n).map(|i| y[(i + 1) * len + start]).collect(),
        boundary_mass: worst_boundary,
        states: len,
        steps,
    })
}
