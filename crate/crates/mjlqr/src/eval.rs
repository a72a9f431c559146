//! Shared per-policy evaluation bundle for the optimizers and checkers.
//!
//! One evaluation solves both coupled Lyapunov equations and assembles every
//! quantity the iterative methods touch. A [`Workspace`] carries warm starts
//! (previous value, correlation and spectral iterates) across the evaluations
//! of one optimizer run; nearby policies then certify in a few sweeps.

use crate::chain::MarkovChain;
use crate::error::{Error, Result};
use crate::lyap::{solve_lyap_gamma, LyapKind};
use crate::ops::{closed_loop, mode_expectation, spectral_radius_gamma, SpectralCache, MSS_MARGIN};
use crate::problem::{MjlsProblem, Policy};
use crate::tuple::MatTuple;
use crate::value::{initial_correlation, stage_cost};

/// Warm-start state reused across the evaluations of one run.
#[derive(Debug, Clone, Default)]
pub(crate) struct Workspace {
    spectral: SpectralCache,
    p_warm: Option<MatTuple>,
    x_warm: Option<MatTuple>,
}

/// Everything the methods need at one policy.
#[derive(Debug, Clone)]
pub(crate) struct PolicyEval {
    /// Closed-loop tuple `Γ = A - BK`.
    pub gamma: MatTuple,
    /// Lifted spectral radius of the closed loop.
    pub rho: f64,
    /// Value tuple `P`.
    pub p: MatTuple,
    /// State correlation tuple `X`.
    pub x: MatTuple,
    /// Expected cost `⟨P, X(0)⟩`.
    pub cost: f64,
    /// Per-mode curvature `Ψ = R + Bᵀ𝓔(P)B`, symmetric positive definite.
    pub psi: MatTuple,
    /// Gain residual `L = ΨK - Bᵀ𝓔(P)A`; vanishes exactly at the optimum.
    pub l: MatTuple,
    /// Cost gradient `∇C = 2 L X`.
    pub grad: MatTuple,
}

impl PolicyEval {
    /// Euclidean norm of the gradient over all modes.
    pub fn grad_norm2(&self) -> f64 {
        self.grad.norm_two()
    }
}

/// Spectral radius of the closed loop of `policy`, reusing warm iterates.
pub(crate) fn rho_warm(
    problem: &MjlsProblem,
    policy: &Policy,
    ws: &mut Workspace,
) -> Result<f64> {
    let gamma = closed_loop(problem, policy)?;
    Ok(spectral_radius_gamma(
        problem.chain(),
        &gamma,
        Some(&mut ws.spectral),
    ))
}

/// Evaluates `policy`, failing with a stability error outside the
/// mean-square stabilizing set.
pub(crate) fn evaluate(
    problem: &MjlsProblem,
    policy: &Policy,
    ws: &mut Workspace,
) -> Result<PolicyEval> {
    problem.check_policy(policy)?;
    let chain = problem.chain();
    let gamma = closed_loop(problem, policy)?;
    let rho = spectral_radius_gamma(chain, &gamma, Some(&mut ws.spectral));
    if rho >= 1.0 - MSS_MARGIN {
        return Err(Error::Stability { rho });
    }
    let s = stage_cost(problem, policy);
    let (p, _) = solve_lyap_gamma(chain, &gamma, &s, LyapKind::Value, ws.p_warm.as_ref())?;
    ws.p_warm = Some(p.clone());
    let x0 = initial_correlation(problem);
    let (x, _) = solve_lyap_gamma(chain, &gamma, &x0, LyapKind::Covariance, ws.x_warm.as_ref())?;
    ws.x_warm = Some(x.clone());
    let cost = p.inner(&x0);
    let e_p = expectation_of(chain, &p);
    let n = problem.num_modes();
    let mut psi_blocks = Vec::with_capacity(n);
    let mut l_blocks = Vec::with_capacity(n);
    let mut grad_blocks = Vec::with_capacity(n);
    for i in 0..n {
        let b = problem.b().block(i);
        let bep = b.transpose() * e_p.block(i);
        let psi = problem.r().block(i) + &bep * b;
        let l = &psi * policy.k.block(i) - &bep * problem.a().block(i);
        grad_blocks.push(&l * x.block(i) * 2.0);
        psi_blocks.push(psi);
        l_blocks.push(l);
    }
    Ok(PolicyEval {
        gamma,
        rho,
        p,
        x,
        cost,
        psi: MatTuple::new(psi_blocks).expect("uniform shapes by construction"),
        l: MatTuple::new(l_blocks).expect("uniform shapes by construction"),
        grad: MatTuple::new(grad_blocks).expect("uniform shapes by construction"),
    })
}

fn expectation_of(chain: &MarkovChain, v: &MatTuple) -> MatTuple {
    mode_expectation(chain, v).expect("shapes validated by the caller")
}
