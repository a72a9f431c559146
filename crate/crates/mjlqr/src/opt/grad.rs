//! Exact first- and second-order information of the cost.
//!
//! With value tuple `P`, correlation `X`, curvature `Ψ = R + Bᵀ𝓔(P)B` and
//! gain residual `L = ΨK - Bᵀ𝓔(P)A`:
//!
//! * gradient            `∇C(K) = 2 L X`
//! * value derivative    `P'[E]` solves `V - 𝓛(V) = EᵀL + LᵀE`
//! * Hessian quadratic   `∇²C(K)[E,E] = 2⟨ΨEX, E⟩ - 4⟨Bᵀ𝓔(P'[E])ΓX, E⟩`
//!
//! All three are exact up to the certified Lyapunov residuals; the
//! finite-difference oracles that cross-check them live in `verify`.

use crate::error::Result;
use crate::eval::{evaluate, PolicyEval, Workspace};
use crate::lyap::{solve_lyap_gamma, LyapKind};
use crate::ops::mode_expectation;
use crate::problem::{MjlsProblem, Policy};
use crate::tuple::MatTuple;

/// Gain residual `L` of `policy`; the zero tuple exactly at the optimum.
pub fn gain_residual(problem: &MjlsProblem, policy: &Policy) -> Result<MatTuple> {
    let mut ws = Workspace::default();
    Ok(evaluate(problem, policy, &mut ws)?.l)
}

/// Exact cost gradient `∇C(K) = 2 L X`.
pub fn gradient(problem: &MjlsProblem, policy: &Policy) -> Result<MatTuple> {
    let mut ws = Workspace::default();
    Ok(evaluate(problem, policy, &mut ws)?.grad)
}

/// Directional derivative `P'[E]` of the value tuple along a gain
/// perturbation `E` (same shape as the policy).
pub fn value_derivative(problem: &MjlsProblem, policy: &Policy, e: &MatTuple) -> Result<MatTuple> {
    let mut ws = Workspace::default();
    let eval = evaluate(problem, policy, &mut ws)?;
    value_derivative_eval(problem, &eval, e)
}

/// Hessian quadratic form `∇²C(K)[E,E]`.
pub fn hessian_form(problem: &MjlsProblem, policy: &Policy, e: &MatTuple) -> Result<f64> {
    let mut ws = Workspace::default();
    let eval = evaluate(problem, policy, &mut ws)?;
    hessian_form_eval(problem, &eval, e)
}

pub(crate) fn value_derivative_eval(
    problem: &MjlsProblem,
    eval: &PolicyEval,
    e: &MatTuple,
) -> Result<MatTuple> {
    check_direction(problem, e)?;
    let rhs_blocks = e
        .blocks()
        .iter()
        .zip(eval.l.blocks())
        .map(|(e_i, l_i)| e_i.transpose() * l_i + l_i.transpose() * e_i)
        .collect();
    let rhs = MatTuple::new(rhs_blocks)?;
    let (v, _) = solve_lyap_gamma(problem.chain(), &eval.gamma, &rhs, LyapKind::Value, None)?;
    Ok(v)
}

pub(crate) fn hessian_form_eval(
    problem: &MjlsProblem,
    eval: &PolicyEval,
    e: &MatTuple,
) -> Result<f64> {
    check_direction(problem, e)?;
    let p_deriv = value_derivative_eval(problem, eval, e)?;
    let e_pd = mode_expectation(problem.chain(), &p_deriv)?;
    let n = problem.num_modes();
    let mut curvature = 0.0;
    let mut coupling = 0.0;
    for i in 0..n {
        let e_i = e.block(i);
        let x_i = eval.x.block(i);
        curvature += (eval.psi.block(i) * e_i * x_i).dot(e_i);
        let b_t = problem.b().block(i).transpose();
        coupling += (b_t * e_pd.block(i) * eval.gamma.block(i) * x_i).dot(e_i);
    }
    Ok(2.0 * curvature - 4.0 * coupling)
}

fn check_direction(problem: &MjlsProblem, e: &MatTuple) -> Result<()> {
    if e.len() != problem.num_modes()
        || e.nrows() != problem.input_dim()
        || e.ncols() != problem.state_dim()
    {
        return Err(crate::error::Error::dim(format!(
            "direction has {} blocks of {}x{}, expected {} of {}x{}",
            e.len(),
            e.nrows(),
            e.ncols(),
            problem.num_modes(),
            problem.input_dim(),
            problem.state_dim()
        )));
    }
    Ok(())
}
