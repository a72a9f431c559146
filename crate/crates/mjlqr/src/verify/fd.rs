//! Central finite differences over the exact cost.
//!
//! These oracles differentiate `K ↦ C(K)` numerically and know nothing about
//! the closed-form gradient or Hessian they are used to cross-check. Default
//! steps are `1e-5` for first and `1e-4` for second differences, balancing
//! truncation against round-off at double precision.

use crate::error::Result;
use crate::problem::{MjlsProblem, Policy};
use crate::tuple::MatTuple;
use crate::value::cost;

/// Central-difference gradient of the cost over every gain entry.
///
/// Fails with a stability error if any perturbed policy leaves the
/// mean-square stabilizing set; callers probe policies with enough margin
/// for the chosen `h`.
pub fn fd_gradient(problem: &MjlsProblem, policy: &Policy, h: f64) -> Result<MatTuple> {
    step_check(h)?;
    let mut grad = MatTuple::zeros(
        policy.k.len(),
        policy.k.nrows(),
        policy.k.ncols(),
    );
    let mut perturbed = policy.clone();
    for mode in 0..policy.k.len() {
        for row in 0..policy.k.nrows() {
            for col in 0..policy.k.ncols() {
                let base = policy.k.block(mode)[(row, col)];
                perturbed.k.blocks_mut()[mode][(row, col)] = base + h;
                let plus = cost(problem, &perturbed)?;
                perturbed.k.blocks_mut()[mode][(row, col)] = base - h;
                let minus = cost(problem, &perturbed)?;
                perturbed.k.blocks_mut()[mode][(row, col)] = base;
                grad.blocks_mut()[mode][(row, col)] = (plus - minus) / (2.0 * h);
            }
        }
    }
    Ok(grad)
}

/// Second-order central difference of `t ↦ C(K + tE)` at `t = 0`.
pub fn fd_hessian_form(
    problem: &MjlsProblem,
    policy: &Policy,
    e: &MatTuple,
    h: f64,
) -> Result<f64> {
    step_check(h)?;
    let center = cost(problem, policy)?;
    let plus = cost(problem, &Policy::new(policy.k.axpy(h, e)))?;
    let minus = cost(problem, &Policy::new(policy.k.axpy(-h, e)))?;
    Ok((plus - 2.0 * center + minus) / (h * h))
}

fn step_check(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(crate::error::Error::Domain {
            context: format!("difference step must be positive and finite, got {h}"),
        });
    }
    Ok(())
}
