//! Policy evaluation: value matrices, state correlation and expected cost.
//!
//! For a mean-square stabilizing policy the value tuple `P` solves
//! `P = Q + KᵀRK + 𝓛(P)` and prices the policy from any start, the state
//! correlation `X` solves `X = X(0) + 𝓣(X)` with `X_i(0) = π_i Σ₀` and
//! accumulates the state second moments per mode, and the expected cost obeys
//! `C(K) = Σ_i π_i tr(P_i Σ₀) = ⟨P, X(0)⟩ = ⟨Q + KᵀRK, X⟩`.

use crate::error::{Error, Result};
use crate::lyap::{solve_lyap_gamma, LyapKind};
use crate::ops::{closed_loop, spectral_radius_gamma, MSS_MARGIN};
use crate::problem::{MjlsProblem, Policy, ValueCertificate};
use crate::tuple::MatTuple;

/// Initial mode-indexed correlation `X_i(0) = π_i Σ₀`.
pub fn initial_correlation(problem: &MjlsProblem) -> MatTuple {
    let blocks = problem
        .chain()
        .initial_dist()
        .iter()
        .map(|&pi| problem.sigma0() * pi)
        .collect();
    MatTuple::new(blocks).expect("uniform shapes by construction")
}

/// Stage cost tuple `Q + KᵀRK` of a policy.
pub(crate) fn stage_cost(problem: &MjlsProblem, policy: &Policy) -> MatTuple {
    let blocks = problem
        .q()
        .blocks()
        .iter()
        .zip(problem.r().blocks())
        .zip(policy.k.blocks())
        .map(|((q, r), k)| q + k.transpose() * r * k)
        .collect();
    MatTuple::new(blocks).expect("uniform shapes by construction")
}

/// Value matrices `P` of `policy` with the realized cost and the certified
/// residual of the defining equation.
pub fn value_matrices(problem: &MjlsProblem, policy: &Policy) -> Result<ValueCertificate> {
    problem.check_policy(policy)?;
    let gamma = closed_loop(problem, policy)?;
    let rho = spectral_radius_gamma(problem.chain(), &gamma, None);
    if rho >= 1.0 - MSS_MARGIN {
        return Err(Error::Stability { rho });
    }
    let s = stage_cost(problem, policy);
    let (p, lyap_residual) =
        solve_lyap_gamma(problem.chain(), &gamma, &s, LyapKind::Value, None)?;
    let cost = p.inner(&initial_correlation(problem));
    Ok(ValueCertificate {
        p,
        cost,
        lyap_residual,
    })
}

/// Steady mode-indexed state correlation `X` of `policy`.
pub fn state_correlation(problem: &MjlsProblem, policy: &Policy) -> Result<MatTuple> {
    problem.check_policy(policy)?;
    let gamma = closed_loop(problem, policy)?;
    let rho = spectral_radius_gamma(problem.chain(), &gamma, None);
    if rho >= 1.0 - MSS_MARGIN {
        return Err(Error::Stability { rho });
    }
    let s = initial_correlation(problem);
    let (x, _residual) =
        solve_lyap_gamma(problem.chain(), &gamma, &s, LyapKind::Covariance, None)?;
    Ok(x)
}

/// Expected infinite-horizon cost of `policy`.
pub fn cost(problem: &MjlsProblem, policy: &Policy) -> Result<f64> {
    Ok(value_matrices(problem, policy)?.cost)
}
