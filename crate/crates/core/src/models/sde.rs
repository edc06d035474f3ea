use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

/// A parameterized Itô SDE `dX = μ_θ(t, X) dt + σ_θ(t, X) dB` together with a
/// running reward `ρ_θ` and a terminal reward `g_θ` on `[0, T]`.
///
/// Array layouts (all row-major, `d` = state dim, `w` = noise dim):
///
/// | quantity            | length      | index of `∂…`                  |
/// |---------------------|-------------|--------------------------------|
/// | `drift`             | `d`         | `a`                            |
/// | `diffusion`         | `d·w`       | `a·w + j`                      |
/// | `drift_jacobian`    | `d·d`       | `a·d + b`   (= ∂_b μ_a)        |
/// | `diffusion_jacobian`| `d·w·d`     | `(a·w + j)·d + b`              |
/// | `drift_hessian`     | `d·d·d`     | `(a·d + b)·d + c`              |
/// | `diffusion_hessian` | `d·w·d·d`   | `((a·w + j)·d + b)·d + c`      |
/// | reward gradients    | `d`         | `b`                            |
/// | reward hessians     | `d·d`       | `b·d + c`                      |
///
/// The running reward is zero unless [`SdeModel::has_reward_rate`] returns
/// true; implementors supplying `ρ` must override it together with the
/// `reward_rate*` methods.
pub trait SdeModel<S: Scalar>: Send + Sync {
    fn state_dim(&self) -> usize;
    fn noise_dim(&self) -> usize;
    fn param_count(&self) -> usize;
    /// Terminal time `T > 0`.
    fn horizon(&self) -> S;

    fn drift(&self, t: S, x: &[S], theta: &[S]) -> Vec<S>;
    fn diffusion(&self, t: S, x: &[S], theta: &[S]) -> Vec<S>;
    fn terminal_reward(&self, x: &[S], theta: &[S]) -> S;

    fn drift_param_derivative(&self, t: S, x: &[S], theta: &[S], i: usize) -> Vec<S>;
    fn diffusion_param_derivative(&self, t: S, x: &[S], theta: &[S], i: usize) -> Vec<S>;
    fn terminal_reward_param_derivative(&self, _x: &[S], _theta: &[S], _i: usize) -> S {
        S::zero()
    }

    fn drift_jacobian(&self, t: S, x: &[S], theta: &[S]) -> Vec<S>;
    fn diffusion_jacobian(&self, t: S, x: &[S], theta: &[S]) -> Vec<S>;
    fn drift_hessian(&self, t: S, x: &[S], theta: &[S]) -> Vec<S>;
    fn diffusion_hessian(&self, t: S, x: &[S], theta: &[S]) -> Vec<S>;
    fn terminal_reward_gradient(&self, x: &[S], theta: &[S]) -> Vec<S>;
    fn terminal_reward_hessian(&self, x: &[S], theta: &[S]) -> Vec<S>;

    fn has_reward_rate(&self) -> bool {
        false
    }
    fn reward_rate(&self, _t: S, _x: &[S], _theta: &[S]) -> S {
        S::zero()
    }
    fn reward_rate_param_derivative(&self, _t: S, _x: &[S], _theta: &[S], _i: usize) -> S {
        S::zero()
    }
    fn reward_rate_gradient(&self, _t: S, _x: &[S], _theta: &[S]) -> Vec<S> {
        vec![S::zero(); self.state_dim()]
    }
    fn reward_rate_hessian(&self, _t: S, _x: &[S], _theta: &[S]) -> Vec<S> {
        let d = self.state_dim();
        vec![S::zero(); d * d]
    }
}

/// `a = ½ σ σᵀ` from a row-major `d×w` volatility.
pub fn diffusion_matrix_from_sigma<S: Scalar>(sigma: &[S], d: usize, w: usize) -> Vec<S> {
    let half = S::of(0.5);
    let mut a = vec![S::zero(); d * d];
    for r in 0..d {
        for c in r..d {
            let mut acc = S::zero();
            for j in 0..w {
                acc += sigma[r * w + j] * sigma[c * w + j];
            }
            a[r * d + c] = half * acc;
            a[c * d + r] = half * acc;
        }
    }
    a
}

/// `∂θi a = ½ (∂θi σ σᵀ + σ ∂θi σᵀ)` from precomputed `σ` and `∂θi σ`.
pub fn diffusion_matrix_param_derivative_from<S: Scalar>(
    sigma: &[S],
    d_sigma: &[S],
    d: usize,
    w: usize,
) -> Vec<S> {
    let half = S::of(0.5);
    let mut out = vec![S::zero(); d * d];
    for r in 0..d {
        for c in r..d {
            let mut acc = S::zero();
            for j in 0..w {
                acc += d_sigma[r * w + j] * sigma[c * w + j] + sigma[r * w + j] * d_sigma[c * w + j];
            }
            out[r * d + c] = half * acc;
            out[c * d + r] = half * acc;
        }
    }
    out
}

/// Diffusion matrix `a_θ(t, x) = ½ σ σᵀ` of `model`.
pub fn diffusion_matrix<S: Scalar, M: SdeModel<S> + ?Sized>(
    model: &M,
    t: S,
    x: &[S],
    theta: &[S],
) -> Result<Vec<S>> {
    let (d, w) = (model.state_dim(), model.noise_dim());
    check_len("state", x.len(), d)?;
    let sigma = model.diffusion(t, x, theta);
    check_len("diffusion", sigma.len(), d * w)?;
    Ok(diffusion_matrix_from_sigma(&sigma, d, w))
}

/// Parametric derivative `∂θi a_θ(t, x)`.
pub fn diffusion_matrix_param_derivative<S: Scalar, M: SdeModel<S> + ?Sized>(
    model: &M,
    t: S,
    x: &[S],
    theta: &[S],
    i: usize,
) -> Result<Vec<S>> {
    let n = model.param_count();
    if i >= n {
        return Err(Error::ParamIndex { index: i, count: n });
    }
    let (d, w) = (model.state_dim(), model.noise_dim());
    check_len("state", x.len(), d)?;
    let sigma = model.diffusion(t, x, theta);
    check_len("diffusion", sigma.len(), d * w)?;
    let d_sigma = model.diffusion_param_derivative(t, x, theta, i);
    check_len("diffusion parameter derivative", d_sigma.len(), d * w)?;
    Ok(diffusion_matrix_param_derivative_from(&sigma, &d_sigma, d, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_sigma() {
        assert_eq!(diffusion_matrix_from_sigma(&[2.0_f64], 1, 1), vec![2.0]);
    }

    #[test]
    fn zero_sigma() {
        assert_eq!(diffusion_matrix_from_sigma(&[0.0_f64; 6], 3, 2), vec![0.0; 9]);
    }

    #[test]
    fn lower_triangular_sigma() {
        let a = diffusion_matrix_from_sigma(&[1.0_f64, 0.0, 1.0, 1.0], 2, 2);
        assert_eq!(a, vec![0.5, 0.5, 0.5, 1.0]);
    }

    #[test]
    fn param_derivative_examples() {
        let theta = 1.7_f64;
        assert_eq!(diffusion_matrix_param_derivative_from(&[theta], &[1.0], 1, 1), vec![theta]);
        assert_eq!(
            diffusion_matrix_param_derivative_from(&[0.3_f64, 0.2, 0.9, 0.1], &[0.0; 4], 2, 2),
            vec![0.0; 4]
        );
        // d = 1, w = 2, σ = [θ1, θ2], derivative in θ1 is [1, 0]
        let (t1, t2) = (0.8_f64, -1.3);
        assert_eq!(diffusion_matrix_param_derivative_from(&[t1, t2], &[1.0, 0.0], 1, 2), vec![t1]);
    }
}
