//! Shared fixtures and independent oracles for the integration tests.
//!
//! Everything here is written directly from the defining equations, avoiding
//! the library's own operator and solver code paths, so agreement between the
//! two is evidence rather than tautology.

#![allow(dead_code)]

use mjlqr::bench::{random_instance, GenSpec};
use mjlqr::chain::MarkovChain;
use mjlqr::tuple::MatTuple;
use mjlqr::{MjlsProblem, Policy};
use nalgebra::{DMatrix, DVector};

/// Single-mode scalar fixture: `A = 0.9`, `B = Q = R = Σ₀ = 1`.
pub fn f1() -> MjlsProblem {
    scalar_problem(&[0.9], &[1.0], &[1.0], &[1.0], &[[1.0]], &[1.0], 1.0)
}

/// Two-mode scalar fixture: `A = (1.2, 0.5)`, `B = (1, 1)`, `Q = R = (1, 1)`,
/// uniform transitions and initial distribution, `Σ₀ = 1`.
pub fn f2() -> MjlsProblem {
    scalar_problem(
        &[1.2, 0.5],
        &[1.0, 1.0],
        &[1.0, 1.0],
        &[1.0, 1.0],
        &[[0.5, 0.5], [0.5, 0.5]],
        &[0.5, 0.5],
        1.0,
    )
}

/// Builds a scalar-per-mode problem from plain lists.
pub fn scalar_problem<const N: usize>(
    a: &[f64],
    b: &[f64],
    q: &[f64],
    r: &[f64],
    transition: &[[f64; N]; N],
    initial_dist: &[f64],
    sigma0: f64,
) -> MjlsProblem {
    let n = a.len();
    assert_eq!(n, N);
    let flat: Vec<f64> = transition.iter().flatten().copied().collect();
    let chain = MarkovChain::new(
        DMatrix::from_row_slice(n, n, &flat),
        DVector::from_row_slice(initial_dist),
    )
    .expect("fixture chain is valid");
    MjlsProblem::new(
        MatTuple::scalars(a).unwrap(),
        MatTuple::scalars(b).unwrap(),
        MatTuple::scalars(q).unwrap(),
        MatTuple::scalars(r).unwrap(),
        chain,
        DMatrix::from_element(1, 1, sigma0),
    )
    .expect("fixture problem is valid")
}

/// Scalar policy from per-mode gains.
pub fn scalar_policy(gains: &[f64]) -> Policy {
    Policy::new(MatTuple::scalars(gains).unwrap())
}

/// Deterministic random instance with a stable open loop.
pub fn random_stable(
    state_dim: usize,
    input_dim: usize,
    num_modes: usize,
    seed: u64,
) -> (MjlsProblem, Policy) {
    let spec = GenSpec {
        state_dim,
        input_dim,
        num_modes,
        seed,
        dirichlet_kappa: (num_modes.saturating_sub(1)).max(1) as f64,
        target_radius: 0.9,
    };
    random_instance(&spec).expect("generation succeeds for small dims")
}

// ---------------------------------------------------------------------------
// Independent operator implementations, straight from the definitions.

/// `𝓔_i(V) = Σ_j p_ij V_j`, written as plain loops.
pub fn oracle_mode_expectation(problem: &MjlsProblem, v: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    let chain = problem.chain();
    let n = v.len();
    (0..n)
        .map(|i| {
            let mut acc = DMatrix::zeros(v[0].nrows(), v[0].ncols());
            for (j, vj) in v.iter().enumerate() {
                acc += vj * chain.prob(i, j);
            }
            acc
        })
        .collect()
}

/// Closed-loop blocks `Γ_i = A_i - B_i K_i`.
pub fn oracle_closed_loop(problem: &MjlsProblem, policy: &Policy) -> Vec<DMatrix<f64>> {
    (0..problem.num_modes())
        .map(|i| problem.a().block(i) - problem.b().block(i) * policy.k.block(i))
        .collect()
}

/// Value step `𝓛_i(V) = Γ_iᵀ 𝓔_i(V) Γ_i`.
pub fn oracle_apply_l(
    problem: &MjlsProblem,
    policy: &Policy,
    v: &[DMatrix<f64>],
) -> Vec<DMatrix<f64>> {
    let gamma = oracle_closed_loop(problem, policy);
    let expected = oracle_mode_expectation(problem, v);
    (0..v.len())
        .map(|i| gamma[i].transpose() * &expected[i] * &gamma[i])
        .collect()
}

/// Covariance step `𝓣_j(V) = Σ_i p_ij Γ_i V_i Γ_iᵀ`.
pub fn oracle_apply_t(
    problem: &MjlsProblem,
    policy: &Policy,
    v: &[DMatrix<f64>],
) -> Vec<DMatrix<f64>> {
    let gamma = oracle_closed_loop(problem, policy);
    let chain = problem.chain();
    let n = v.len();
    let d = v[0].nrows();
    (0..n)
        .map(|j| {
            let mut acc = DMatrix::zeros(d, d);
            for i in 0..n {
                acc += &gamma[i] * &v[i] * gamma[i].transpose() * chain.prob(i, j);
            }
            acc
        })
        .collect()
}

/// Frobenius norm over a whole block list.
pub fn frob(blocks: &[DMatrix<f64>]) -> f64 {
    blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
}

/// Truncated-series solution of `V = S + Op(V)` for a contraction `Op`.
///
/// Sums `Σ_t Op^t(S)` until the running term falls below `1e-16` of the
/// accumulated norm; panics if 200000 terms do not suffice (the callers only
/// pass stable closed loops).
pub fn oracle_series_solve(
    s: &[DMatrix<f64>],
    mut op: impl FnMut(&[DMatrix<f64>]) -> Vec<DMatrix<f64>>,
) -> Vec<DMatrix<f64>> {
    let mut total = s.to_vec();
    let mut term = s.to_vec();
    for _ in 0..200_000 {
        term = op(&term);
        for (t, inc) in total.iter_mut().zip(&term) {
            *t += inc;
        }
        if frob(&term) <= 1e-16 * (1.0 + frob(&total)) {
            return total;
        }
    }
    panic!("series did not converge; the closed loop is too close to instability");
}

/// Value tuple of a policy by the series oracle.
pub fn oracle_value(problem: &MjlsProblem, policy: &Policy) -> Vec<DMatrix<f64>> {
    let s: Vec<DMatrix<f64>> = (0..problem.num_modes())
        .map(|i| {
            let k = policy.k.block(i);
            problem.q().block(i) + k.transpose() * problem.r().block(i) * k
        })
        .collect();
    oracle_series_solve(&s, |v| oracle_apply_l(problem, policy, v))
}

/// State-correlation tuple of a policy by the series oracle.
pub fn oracle_state_correlation(problem: &MjlsProblem, policy: &Policy) -> Vec<DMatrix<f64>> {
    let x0: Vec<DMatrix<f64>> = (0..problem.num_modes())
        .map(|i| problem.sigma0() * problem.chain().initial_dist()[i])
        .collect();
    oracle_series_solve(&x0, |v| oracle_apply_t(problem, policy, v))
}

/// Expected cost by the series oracle: `Σ_i π_i tr(P_i Σ₀)`.
pub fn oracle_cost(problem: &MjlsProblem, policy: &Policy) -> f64 {
    let p = oracle_value(problem, policy);
    (0..problem.num_modes())
        .map(|i| (problem.sigma0() * &p[i]).trace() * problem.chain().initial_dist()[i])
        .sum()
}

// ---------------------------------------------------------------------------
// Single-mode discrete Riccati oracle (structured doubling).

/// Solves `P = Q + AᵀPA - AᵀPB (R + BᵀPB)⁻¹ BᵀPA` by structured doubling:
///
/// with `G₀ = B R⁻¹ Bᵀ`, `H₀ = Q`, the iteration
/// `A⁺ = A (I + G H)⁻¹ A`, `G⁺ = G + A (I + G H)⁻¹ G Aᵀ`,
/// `H⁺ = H + Aᵀ H (I + G H)⁻¹ A` drives `H` quadratically to `P`.
pub fn oracle_dare(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> DMatrix<f64> {
    let d = a.nrows();
    let r_inv = r
        .clone()
        .cholesky()
        .expect("R is positive definite")
        .inverse();
    let mut ak = a.clone();
    let mut g = b * r_inv * b.transpose();
    let mut h = q.clone();
    for _ in 0..200 {
        let m = (DMatrix::identity(d, d) + &g * &h)
            .lu()
            .try_inverse()
            .expect("I + GH is invertible for PSD G, H");
        let a_next = &ak * &m * &ak;
        let g_next = &g + &ak * &m * &g * ak.transpose();
        let h_next = &h + ak.transpose() * &h * &m * &ak;
        let step = (&h_next - &h).norm();
        ak = a_next;
        g = g_next;
        h = h_next.clone();
        if step <= 1e-15 * (1.0 + h.norm()) {
            break;
        }
    }
    h
}

/// The scalar closed-form optimum of the single-mode fixture:
/// `p² - (a² - 1 + q b²/r) r/b² · p - q r/b² = 0` specialized to F1, and the
/// induced gain `k = a b p / (r + b² p)`.
pub fn f1_closed_form() -> (f64, f64) {
    // p = q + a² r p / (r + b² p) with a = 0.9, b = q = r = 1:
    // p² - 0.81 p - 1 = 0.
    let p = (0.81 + (0.81f64 * 0.81 + 4.0).sqrt()) / 2.0;
    let k = 0.9 * p / (1.0 + p);
    (p, k)
}

/// Exact rational values at the F1 policy `K = 0.4` (closed loop `0.5`):
/// value, correlation, gain residual, gradient.
pub struct F1At04 {
    pub p: f64,
    pub x: f64,
    pub l: f64,
    pub grad: f64,
}

/// `P = (1 + 0.16)/(1 - 0.25)`, `X = 1/(1 - 0.25)`,
/// `L = (1 + P)·0.4 - 0.9·P`, `∇C = 2 L X`.
pub fn f1_at_04() -> F1At04 {
    F1At04 {
        p: 116.0 / 75.0,
        x: 4.0 / 3.0,
        l: -28.0 / 75.0,
        grad: -224.0 / 225.0,
    }
}
