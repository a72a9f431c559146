//! Theoretical constants behind the step-size rules and rate certificates.
//!
//! Over the sublevel set of cost value `α` the cost is `L`-smooth with
//!
//! `ξ = (1/Λ_min(Q)) ((1 + ‖B‖∞²) α / μ + ‖R‖∞) - 1`
//! `L = 2 (‖R‖∞ + ‖B‖∞² (1 + 2ξ/‖B‖∞) α / μ) α / Λ_min(Q)`
//!
//! where `μ = min_i π_i · σ_min(Σ₀)` lower-bounds the correlation any
//! stabilizing policy can reach. Both constants grow monotonically in `α`,
//! so certifying at `α = C(K⁰)` covers the whole descent path.

use crate::error::{Error, Result};
use crate::problem::MjlsProblem;
use crate::riccati::CareSolution;
use crate::value::state_correlation;

/// Constants certified over one sublevel set.
#[derive(Debug, Clone, Copy)]
pub struct ConstantBundle {
    /// Correlation floor `min_i π_i · σ_min(Σ₀)`; strictly positive.
    pub mu: f64,
    /// Sublevel value the bundle is certified at.
    pub alpha: f64,
    /// Value-derivative amplification factor at `alpha`.
    pub xi: f64,
    /// Smoothness constant of the cost over the `alpha`-sublevel set.
    pub smoothness_l: f64,
    /// `‖X‖∞` at the optimal policy; present only when computed from a
    /// Riccati solution, never estimated.
    pub x_star_maxnorm: Option<f64>,
}

/// Correlation floor `μ = min_i π_i · σ_min(Σ₀)`; strictly positive for
/// every valid problem.
pub fn mu_constant(problem: &MjlsProblem) -> f64 {
    let sigma_min = problem
        .sigma0()
        .singular_values()
        .iter()
        .fold(f64::INFINITY, |a, &s| a.min(s));
    problem.chain().min_initial_prob() * sigma_min
}

/// Computes `ξ` and the smoothness constant at sublevel value `alpha`.
///
/// The bundle is meaningful as a certificate only for `alpha` at least the
/// optimal cost; without a Riccati solution that cannot be checked here, so
/// only positivity of `alpha` is enforced.
pub fn smoothness_constants(problem: &MjlsProblem, alpha: f64) -> Result<ConstantBundle> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain {
            context: format!("sublevel value must be positive and finite, got {alpha}"),
        });
    }
    let mu = mu_constant(problem);
    let b_max = problem.b().norm_max();
    let r_max = problem.r().norm_max();
    let q_floor = problem.q().lambda_min();
    let xi = ((1.0 + b_max * b_max) * alpha / mu + r_max) / q_floor - 1.0;
    // ‖B‖∞²(1 + 2ξ/‖B‖∞) expanded to ‖B‖∞² + 2ξ‖B‖∞, which stays defined
    // for an input-free mode tuple with ‖B‖∞ = 0.
    let smoothness_l =
        2.0 * (r_max + (b_max * b_max + 2.0 * xi * b_max) * alpha / mu) * alpha / q_floor;
    Ok(ConstantBundle {
        mu,
        alpha,
        xi,
        smoothness_l,
        x_star_maxnorm: None,
    })
}

/// As [`smoothness_constants`], additionally validating `alpha` against the
/// optimal cost and filling `x_star_maxnorm` from the Riccati solution.
pub fn smoothness_constants_with_truth(
    problem: &MjlsProblem,
    alpha: f64,
    truth: &CareSolution,
) -> Result<ConstantBundle> {
    if alpha < truth.cost * (1.0 - 1e-12) {
        return Err(Error::Domain {
            context: format!(
                "sublevel value {alpha} is below the optimal cost {}",
                truth.cost
            ),
        });
    }
    let mut bundle = smoothness_constants(problem, alpha)?;
    let x_star = state_correlation(problem, &truth.k_star)?;
    bundle.x_star_maxnorm = Some(x_star.norm_max());
    Ok(bundle)
}
