//! Deterministic ground truth for the Monte Carlo estimators.
//!
//! * 1-D Crank–Nicolson solvers for the backward Feynman–Kac equation
//!   `∂t v + μ ∂x v + a ∂²x v + ρ = 0, v(T) = g` and the forward
//!   Fokker–Planck equation `∂t p = −∂x(μ p) + ∂²x(a p)`.
//! * A numerical check that `∂θi v(0, x0)` equals
//!   `∫⟨∂θiL v, p⟩ dt + ∫⟨∂θiρ, p⟩ dt + ⟨∂θi g, p(T)⟩`, with `p` the
//!   forward density started at `x0`.
//! * A truncated master-equation solver returning exact values and gradients
//!   for small reaction networks.

mod master;
mod pde;

pub use master::{solve_master_equation_value_and_gradient, MasterEquationSolution, MAX_TRUNCATED_STATES};
pub use pde::{
    check_adjoint_identity, solve_feynman_kac_1d, solve_fokker_planck_1d, AdjointReport, FieldKind, FieldSolution,
    SpaceTimeGrid,
};
