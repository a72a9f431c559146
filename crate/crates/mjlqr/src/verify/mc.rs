//! Monte Carlo estimation of the closed-loop cost from truncated rollouts.
//!
//! Each rollout draws an initial state with second moment `Σ₀` (Gaussian;
//! only the first two moments enter the expected cost), an initial mode from
//! `π` and a mode path from the transition matrix, then accumulates the
//! quadratic stage costs over a finite horizon. Every rollout derives its
//! generator stream from `(seed, rollout index)`, so the estimate is
//! bit-identical regardless of thread count or scheduling.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ops::{closed_loop, is_mss};
use crate::problem::{MjlsProblem, Policy};

/// Truncation target: the horizon must push the lifted power below this.
const TRUNCATION: f64 = 1e-12;

/// Sampled estimate of the expected cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutEstimate {
    /// Sample mean of the per-rollout truncated costs.
    pub mean: f64,
    /// Standard error of the mean; zero for a single rollout.
    pub stderr: f64,
    /// Steps simulated per rollout.
    pub horizon: usize,
    /// Number of independent rollouts.
    pub rollouts: usize,
    /// Base seed the streams were derived from.
    pub seed: u64,
}

/// Estimates the expected cost of `policy` from `rollouts` truncated
/// simulations of `horizon` steps each.
///
/// The horizon must satisfy `ρ^horizon ≤ 1e-12` for the lifted spectral
/// radius `ρ`, so the truncated tail is negligible against the statistical
/// error; shorter horizons are refused.
pub fn mc_cost(
    problem: &MjlsProblem,
    policy: &Policy,
    horizon: usize,
    rollouts: usize,
    seed: u64,
) -> Result<RolloutEstimate> {
    if horizon == 0 || rollouts == 0 {
        return Err(Error::Domain {
            context: format!("horizon {horizon} and rollouts {rollouts} must both be positive"),
        });
    }
    let (stable, rho) = is_mss(problem, policy)?;
    if !stable {
        return Err(Error::Stability { rho });
    }
    if rho > 0.0 && rho.powi(horizon as i32) > TRUNCATION {
        let needed = (TRUNCATION.ln() / rho.ln()).ceil() as usize;
        return Err(Error::Domain {
            context: format!(
                "horizon {horizon} leaves a truncation tail above {TRUNCATION:.0e} at spectral \
                 radius {rho:.6}; at least {needed} steps required"
            ),
        });
    }
    let chol = nalgebra::Cholesky::new(problem.sigma0().clone()).ok_or_else(|| {
        Error::SingularSystem {
            context: "initial covariance lost positive definiteness".into(),
        }
    })?;
    let sqrt_sigma0 = chol.l();
    let gamma = closed_loop(problem, policy)?;
    let costs: Vec<f64> = (0..rollouts)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            single_rollout(problem, policy, &gamma, &sqrt_sigma0, horizon, &mut rng)
        })
        .collect();
    // Sequential reduction in index order keeps the result thread-invariant.
    let n = rollouts as f64;
    let mean = costs.iter().sum::<f64>() / n;
    let stderr = if rollouts > 1 {
        let var = costs.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(RolloutEstimate {
        mean,
        stderr,
        horizon,
        rollouts,
        seed,
    })
}

fn single_rollout(
    problem: &MjlsProblem,
    policy: &Policy,
    gamma: &crate::tuple::MatTuple,
    sqrt_sigma0: &nalgebra::DMatrix<f64>,
    horizon: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let d = problem.state_dim();
    let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut x = sqrt_sigma0 * z;
    let mut mode = sample_index(problem.chain().initial_dist().as_slice(), rng);
    let mut total = 0.0;
    for _ in 0..horizon {
        let u = -(policy.k.block(mode) * &x);
        total += (problem.q().block(mode) * &x).dot(&x) + (problem.r().block(mode) * &u).dot(&u);
        x = gamma.block(mode) * x;
        let row = problem.chain().transition().row(mode);
        mode = sample_index(row.transpose().as_slice(), rng);
    }
    total
}

/// Inverse-CDF draw from a probability vector.
fn sample_index(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}
