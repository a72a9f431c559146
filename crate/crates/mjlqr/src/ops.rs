//! Mode-coupled operators of the closed-loop jump system.
//!
//! For a closed loop `Γ_i = A_i - B_i K_i` and a tuple `V` of d x d blocks:
//!
//! * mode expectation   `𝓔_i(V) = Σ_j p_ij V_j`
//! * covariance step    `𝓣_j(V) = Σ_i p_ij Γ_i V_i Γ_iᵀ`
//! * value step         `𝓛_i(V) = Γ_iᵀ 𝓔_i(V) Γ_i`
//!
//! `𝓣` and `𝓛` are adjoint under the trace inner product. Stacking
//! column-major vectorizations of the blocks (modes in order) represents `𝓛`
//! by the square lifted matrix of side N d² whose (i,j) block is
//! `p_ij (Γ_iᵀ ⊗ Γ_iᵀ)`; the transpose represents `𝓣`. The closed loop is
//! mean-square stable exactly when the lifted spectral radius is below one,
//! which is the stability test everything downstream relies on.

use nalgebra::DMatrix;

use crate::chain::MarkovChain;
use crate::error::Result;
use crate::problem::{MjlsProblem, Policy};
use crate::tuple::MatTuple;

/// Spectral radii within this margin of 1 are reported unstable; boundary
/// instances make the lifted resolvent arbitrarily ill conditioned.
pub const MSS_MARGIN: f64 = 1e-9;

/// Largest lifted side for which the spectral radius is computed from a dense
/// eigendecomposition; larger systems use the two-sided power iteration.
const DENSE_EIG_LIMIT: usize = 200;

/// Relative stall tolerance of the power iteration.
const POWER_TOL: f64 = 1e-13;

/// Iteration cap of the power iteration; reaching it yields the last estimate.
const POWER_MAX_ITER: usize = 50_000;

/// Per-mode expectation over the next mode: block `i` of the result is
/// `Σ_j p_ij V_j`.
pub fn mode_expectation(chain: &MarkovChain, v: &MatTuple) -> Result<MatTuple> {
    if v.len() != chain.num_modes() {
        return Err(crate::error::Error::dim(format!(
            "tuple has {} blocks for a {}-mode chain",
            v.len(),
            chain.num_modes()
        )));
    }
    let n = v.len();
    let mut blocks = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = DMatrix::zeros(v.nrows(), v.ncols());
        for j in 0..n {
            let p = chain.prob(i, j);
            if p != 0.0 {
                acc.zip_apply(v.block(j), |a, b| *a += p * b);
            }
        }
        blocks.push(acc);
    }
    MatTuple::new(blocks)
}

/// Closed-loop tuple `Γ_i = A_i - B_i K_i`.
pub fn closed_loop(problem: &MjlsProblem, policy: &Policy) -> Result<MatTuple> {
    problem.check_policy(policy)?;
    let blocks = problem
        .a()
        .blocks()
        .iter()
        .zip(problem.b().blocks())
        .zip(policy.k.blocks())
        .map(|((a, b), k)| a - b * k)
        .collect();
    MatTuple::new(blocks)
}

/// Covariance-propagation step `𝓣_j(V) = Σ_i p_ij Γ_i V_i Γ_iᵀ`.
pub fn apply_t(problem: &MjlsProblem, policy: &Policy, v: &MatTuple) -> Result<MatTuple> {
    problem.check_state_tuple(v, "operator input")?;
    let gamma = closed_loop(problem, policy)?;
    Ok(apply_t_gamma(problem.chain(), &gamma, v))
}

/// Value step `𝓛_i(V) = Γ_iᵀ 𝓔_i(V) Γ_i`.
pub fn apply_l(problem: &MjlsProblem, policy: &Policy, v: &MatTuple) -> Result<MatTuple> {
    problem.check_state_tuple(v, "operator input")?;
    let gamma = closed_loop(problem, policy)?;
    Ok(apply_l_gamma(problem.chain(), &gamma, v))
}

pub(crate) fn apply_t_gamma(chain: &MarkovChain, gamma: &MatTuple, v: &MatTuple) -> MatTuple {
    let n = v.len();
    let d = v.nrows();
    let pushed: Vec<DMatrix<f64>> = (0..n)
        .map(|i| {
            let g = gamma.block(i);
            g * v.block(i) * g.transpose()
        })
        .collect();
    let mut blocks = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc = DMatrix::zeros(d, d);
        for (i, m) in pushed.iter().enumerate() {
            let p = chain.prob(i, j);
            if p != 0.0 {
                acc.zip_apply(m, |a, b| *a += p * b);
            }
        }
        blocks.push(acc);
    }
    MatTuple::new(blocks).expect("uniform shapes by construction")
}

pub(crate) fn apply_l_gamma(chain: &MarkovChain, gamma: &MatTuple, v: &MatTuple) -> MatTuple {
    let n = v.len();
    let d = v.nrows();
    let mut blocks = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = DMatrix::zeros(d, d);
        for j in 0..n {
            let p = chain.prob(i, j);
            if p != 0.0 {
                e.zip_apply(v.block(j), |a, b| *a += p * b);
            }
        }
        let g = gamma.block(i);
        blocks.push(g.transpose() * e * g);
    }
    MatTuple::new(blocks).expect("uniform shapes by construction")
}

/// Dense lifted representation of the value step: the square matrix `M` of
/// side N d² with block `(i,j) = p_ij (Γ_iᵀ ⊗ Γ_iᵀ)`, so that
/// `vec(𝓛(V)) = M vec(V)` for column-major, mode-stacked vectorization.
/// `Mᵀ` represents the covariance step.
///
/// The result has (N d²)² entries; intended for desk-scale systems, while the
/// solvers switch to matrix-free iteration beyond that.
pub fn lifted_matrix(problem: &MjlsProblem, policy: &Policy) -> Result<DMatrix<f64>> {
    let gamma = closed_loop(problem, policy)?;
    Ok(lifted_from_gamma(problem.chain(), &gamma))
}

pub(crate) fn lifted_from_gamma(chain: &MarkovChain, gamma: &MatTuple) -> DMatrix<f64> {
    let n = gamma.len();
    let dd = gamma.nrows() * gamma.nrows();
    let side = n * dd;
    let mut out = DMatrix::zeros(side, side);
    for i in 0..n {
        let gt = gamma.block(i).transpose();
        let kron = gt.kronecker(&gt);
        for j in 0..n {
            let p = chain.prob(i, j);
            if p != 0.0 {
                out.view_mut((i * dd, j * dd), (dd, dd))
                    .zip_apply(&kron, |a, b| *a += p * b);
            }
        }
    }
    out
}

/// Warm-startable state of the two-sided power iteration on the lifted
/// operator; reusing it across nearby policies cuts the iteration count to a
/// handful of applications.
#[derive(Debug, Clone, Default)]
pub(crate) struct SpectralCache {
    right: Option<MatTuple>,
    left: Option<MatTuple>,
}

/// Spectral radius of the lifted matrix of the closed loop `gamma`.
///
/// Method: dense eigendecomposition up to side 200; beyond that a two-sided
/// power iteration (right iterate under the value step, left iterate under
/// the covariance step, Rayleigh-style quotient between them). The lifted
/// operator preserves the cone of blockwise PSD tuples, so its spectral
/// radius is attained by a real eigenvalue with a PSD eigentuple and the
/// iteration started at the identity tuple converges for generic spectra.
pub(crate) fn spectral_radius_gamma(
    chain: &MarkovChain,
    gamma: &MatTuple,
    cache: Option<&mut SpectralCache>,
) -> f64 {
    let n = gamma.len();
    let d = gamma.nrows();
    let side = n * d * d;
    if side <= DENSE_EIG_LIMIT {
        let lifted = lifted_from_gamma(chain, gamma);
        return lifted
            .complex_eigenvalues()
            .iter()
            .fold(0.0, |acc, ev| acc.max(ev.norm()));
    }
    power_iteration(chain, gamma, cache)
}

fn power_iteration(
    chain: &MarkovChain,
    gamma: &MatTuple,
    cache: Option<&mut SpectralCache>,
) -> f64 {
    let n = gamma.len();
    let d = gamma.nrows();
    let fresh = || {
        let t = MatTuple::identity(n, d);
        let norm = t.norm_two();
        t.scale(1.0 / norm)
    };
    let (mut right, mut left) = match &cache {
        Some(c) => (
            c.right.clone().unwrap_or_else(fresh),
            c.left.clone().unwrap_or_else(fresh),
        ),
        None => (fresh(), fresh()),
    };
    let mut estimate = f64::NAN;
    let mut stall = 0usize;
    for _ in 0..POWER_MAX_ITER {
        let right_next = apply_l_gamma(chain, gamma, &right);
        let left_next = apply_t_gamma(chain, gamma, &left);
        let denom = left.inner(&right);
        let numer = left.inner(&right_next);
        let rn = right_next.norm_two();
        let ln = left_next.norm_two();
        if rn == 0.0 || ln == 0.0 {
            // The operator annihilated the iterate (nilpotent closed loop).
            estimate = 0.0;
            break;
        }
        let next_estimate = if denom.abs() > 1e-300 {
            numer / denom
        } else {
            rn
        };
        right = right_next.scale(1.0 / rn);
        left = left_next.scale(1.0 / ln);
        if (next_estimate - estimate).abs() <= POWER_TOL * (1.0 + next_estimate.abs()) {
            stall += 1;
            if stall >= 3 {
                estimate = next_estimate;
                break;
            }
        } else {
            stall = 0;
        }
        estimate = next_estimate;
    }
    if let Some(c) = cache {
        c.right = Some(right);
        c.left = Some(left);
    }
    estimate.max(0.0)
}

/// Mean-square stability of the closed loop under `policy`.
///
/// Returns `(stable, rho)` where `rho` is the lifted spectral radius and
/// `stable` holds exactly when `rho < 1 - MSS_MARGIN`.
pub fn is_mss(problem: &MjlsProblem, policy: &Policy) -> Result<(bool, f64)> {
    let gamma = closed_loop(problem, policy)?;
    let rho = spectral_radius_gamma(problem.chain(), &gamma, None);
    Ok((rho < 1.0 - MSS_MARGIN, rho))
}
