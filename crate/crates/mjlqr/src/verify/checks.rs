//! Identity and inequality checkers for the descent theory.
//!
//! Each checker returns the signed quantity a test asserts on, computed from
//! the exact machinery: the almost-smoothness identity gap (zero in exact
//! arithmetic), the gradient-dominance slack (nonnegative), and the sublevel
//! bounds on the value tuple, the correlation trace, the value derivative
//! and the Hessian form (all nonnegative slacks).

use crate::error::Result;
use crate::eval::{evaluate, Workspace};
use crate::opt::{hessian_form, mu_constant, smoothness_constants, value_derivative};
use crate::problem::{MjlsProblem, Policy};
use crate::riccati::CareSolution;
use crate::tuple::MatTuple;
use crate::value::state_correlation;

/// Absolute gap of the almost-smoothness identity
/// `C(K') - C(K) = -2⟨ΔKᵀL^K, X^{K'}⟩ + ⟨ΔKᵀΨ^K ΔK, X^{K'}⟩`, `ΔK = K - K'`.
///
/// The identity is exact, so the gap is round-off only.
pub fn almost_smoothness_gap(
    problem: &MjlsProblem,
    policy: &Policy,
    policy_prime: &Policy,
) -> Result<f64> {
    let mut ws = Workspace::default();
    let at_k = evaluate(problem, policy, &mut ws)?;
    let mut ws_prime = Workspace::default();
    let at_k_prime = evaluate(problem, policy_prime, &mut ws_prime)?;
    let delta = &policy.k - &policy_prime.k;
    let mut linear = 0.0;
    let mut quadratic = 0.0;
    for i in 0..delta.len() {
        let d_i = delta.block(i);
        let x_i = at_k_prime.x.block(i);
        linear += (d_i.transpose() * at_k.l.block(i)).dot(x_i);
        quadratic += (d_i.transpose() * at_k.psi.block(i) * d_i).dot(x_i);
    }
    let expansion = -2.0 * linear + quadratic;
    Ok((at_k_prime.cost - at_k.cost - expansion).abs())
}

/// Slack of the gradient-dominance inequality
/// `C(K) - C(K*) ≤ (‖X*‖∞ / (4μ²Λ_min(R))) ‖∇C(K)‖₂²`;
/// nonnegative up to round-off for every stabilizing policy.
pub fn gradient_dominance_slack(
    problem: &MjlsProblem,
    policy: &Policy,
    truth: &CareSolution,
) -> Result<f64> {
    let mut ws = Workspace::default();
    let eval = evaluate(problem, policy, &mut ws)?;
    let x_star = state_correlation(problem, &truth.k_star)?.norm_max();
    let mu = mu_constant(problem);
    let r_floor = problem.r().lambda_min();
    let grad_sq = eval.grad_norm2().powi(2);
    let bound = x_star / (4.0 * mu * mu * r_floor) * grad_sq;
    Ok(bound - (eval.cost - truth.cost))
}

/// Slacks of the sublevel bounds at one policy; all nonnegative when the
/// theory holds at the evaluated point.
#[derive(Debug, Clone)]
pub struct AppendixBoundReport {
    /// Cost of the policy; the sublevel value the bounds are taken at.
    pub cost: f64,
    /// `C(K)/μ - ‖P‖∞`.
    pub value_slack: f64,
    /// `C(K)/Λ_min(Q) - Σ_i tr X_i`.
    pub trace_slack: f64,
    /// `ξ‖P‖∞ - ‖P'[E]‖∞` per direction, `E` normalized to `‖E‖₂ = 1`,
    /// `ξ` taken at `α = C(K)`.
    pub derivative_slacks: Vec<f64>,
    /// `L‖E‖₂² - |∇²C[E,E]|` per direction, `L` taken at `α = C(K)`.
    pub hessian_slacks: Vec<f64>,
}

/// Evaluates the four sublevel bounds at `policy`, probing the
/// direction-dependent ones along each of `directions`.
pub fn appendix_bounds(
    problem: &MjlsProblem,
    policy: &Policy,
    directions: &[MatTuple],
) -> Result<AppendixBoundReport> {
    let mut ws = Workspace::default();
    let eval = evaluate(problem, policy, &mut ws)?;
    let bundle = smoothness_constants(problem, eval.cost)?;
    let value_slack = eval.cost / bundle.mu - eval.p.norm_max();
    let trace_total: f64 = eval.x.blocks().iter().map(|b| b.trace()).sum();
    let trace_slack = eval.cost / problem.q().lambda_min() - trace_total;
    let mut derivative_slacks = Vec::with_capacity(directions.len());
    let mut hessian_slacks = Vec::with_capacity(directions.len());
    for e in directions {
        let norm = e.norm_two();
        if norm == 0.0 {
            return Err(crate::error::Error::Domain {
                context: "probe direction must be nonzero".into(),
            });
        }
        let unit = e.scale(1.0 / norm);
        let p_deriv = value_derivative(problem, policy, &unit)?;
        derivative_slacks.push(bundle.xi * eval.p.norm_max() - p_deriv.norm_max());
        let form = hessian_form(problem, policy, &unit)?;
        hessian_slacks.push(bundle.smoothness_l - form.abs());
    }
    Ok(AppendixBoundReport {
        cost: eval.cost,
        value_slack,
        trace_slack,
        derivative_slacks,
        hessian_slacks,
    })
}
