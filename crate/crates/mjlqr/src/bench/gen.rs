//! Random benchmark instances with a prescribed open-loop spectral radius.
//!
//! Every draw is taken from a `ChaCha8` stream seeded with the caller's seed,
//! in a fixed order (transition rows, then `A` mode by mode, then `B` mode by
//! mode), so a seed pins the instance byte for byte across platforms.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::chain::MarkovChain;
use crate::error::{Error, Result};
use crate::ops;
use crate::problem::{MjlsProblem, Policy};
use crate::tuple::MatTuple;

use nalgebra::{DMatrix, DVector};

/// How close the rescaled open-loop radius must land to the requested target.
const RADIUS_TOL: f64 = 1e-9;

/// Attempts before giving up on a degenerate draw (for example an all-zero
/// dynamics sample, which cannot be rescaled to a positive radius).
const MAX_REDRAWS: usize = 8;

/// Recipe for a random instance.
#[derive(Debug, Clone, Copy)]
pub struct GenSpec {
    /// State dimension of every mode.
    pub state_dim: usize,
    /// Input dimension of every mode.
    pub input_dim: usize,
    /// Number of chain modes.
    pub num_modes: usize,
    /// Seed for the deterministic generator stream.
    pub seed: u64,
    /// Dirichlet concentration added to the diagonal of each transition row;
    /// larger values make the chain stickier.
    pub dirichlet_kappa: f64,
    /// Spectral radius in `(0, 1)` the uncontrolled closed loop is rescaled
    /// to; staying below one keeps the zero policy feasible.
    pub target_radius: f64,
}

impl GenSpec {
    /// Spec with the default chain stickiness (`max(num_modes - 1, 1)`) and
    /// an open loop close to the stability boundary.
    pub fn new(state_dim: usize, input_dim: usize, num_modes: usize, seed: u64) -> Self {
        Self {
            state_dim,
            input_dim,
            num_modes,
            seed,
            dirichlet_kappa: (num_modes.saturating_sub(1)).max(1) as f64,
            target_radius: 0.9,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.state_dim == 0 || self.input_dim == 0 || self.num_modes == 0 {
            return Err(Error::invalid(
                "generator spec",
                "state_dim, input_dim and num_modes must all be positive",
            ));
        }
        if !(self.dirichlet_kappa > 0.0) || !self.dirichlet_kappa.is_finite() {
            return Err(Error::invalid(
                "generator spec",
                "dirichlet_kappa must be positive and finite",
            ));
        }
        if !(self.target_radius > 0.0 && self.target_radius < 1.0) {
            return Err(Error::invalid(
                "generator spec",
                "target_radius must lie strictly between 0 and 1",
            ));
        }
        Ok(())
    }
}

/// Draws a random instance together with the zero starting policy.
///
/// The transition matrix has Dirichlet rows with concentration
/// `kappa * 1[i == j] + 1`, the initial distribution is uniform, the costs are
/// `Q = R = I`, the initial covariance is `I / 12`, and the dynamics are
/// standard normal draws with `A` rescaled so that the uncontrolled lifted
/// spectral radius equals `target_radius` to within `1e-9`.
pub fn random_instance(spec: &GenSpec) -> Result<(MjlsProblem, Policy)> {
    spec.validate()?;
    let n = spec.num_modes;
    let d = spec.state_dim;
    let k = spec.input_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let transition = sample_transition(&mut rng, n, spec.dirichlet_kappa)?;
    let initial_dist = DVector::from_element(n, 1.0 / n as f64);
    let chain = MarkovChain::new(transition, initial_dist)?;

    let mut a = sample_normal_tuple(&mut rng, n, d, d);
    let mut redraws = 0;
    loop {
        match rescale_to_radius(&mut a, &chain, spec.target_radius) {
            Ok(()) => break,
            Err(err) => {
                redraws += 1;
                if redraws > MAX_REDRAWS {
                    return Err(Error::GenerationFailed {
                        context: format!(
                            "could not reach target radius {} after {} redraws: {}",
                            spec.target_radius, MAX_REDRAWS, err
                        ),
                    });
                }
                a = sample_normal_tuple(&mut rng, n, d, d);
            }
        }
    }
    let b = sample_normal_tuple(&mut rng, n, d, k);

    let q = MatTuple::identity(n, d);
    let r = MatTuple::identity(n, k);
    let sigma0 = DMatrix::identity(d, d) / 12.0;
    let problem = MjlsProblem::new(a, b, q, r, chain, sigma0)?;
    let k0 = Policy::zeros(&problem);
    Ok((problem, k0))
}

/// Dirichlet rows drawn as normalized Gamma variables, row by row.
fn sample_transition(rng: &mut ChaCha8Rng, n: usize, kappa: f64) -> Result<DMatrix<f64>> {
    let mut flat = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut row = vec![0.0; n];
        let mut total = 0.0;
        for (j, entry) in row.iter_mut().enumerate() {
            let shape = if i == j { kappa + 1.0 } else { 1.0 };
            let gamma = Gamma::new(shape, 1.0).map_err(|e| Error::GenerationFailed {
                context: format!("gamma draw with shape {shape}: {e}"),
            })?;
            *entry = gamma.sample(rng);
            total += *entry;
        }
        if !(total > 0.0) {
            return Err(Error::GenerationFailed {
                context: format!("transition row {i} summed to {total}"),
            });
        }
        for entry in &mut row {
            *entry /= total;
        }
        flat.extend_from_slice(&row);
    }
    Ok(DMatrix::from_row_slice(n, n, &flat))
}

/// Tuple of standard normal matrices, filled column by column per mode.
fn sample_normal_tuple(rng: &mut ChaCha8Rng, n: usize, rows: usize, cols: usize) -> MatTuple {
    let blocks = (0..n)
        .map(|_| DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal)))
        .collect();
    MatTuple::new(blocks).expect("uniform sampled shapes")
}

/// Rescales `a` in place so the uncontrolled lifted radius hits the target.
///
/// Scaling the closed loop by `s` scales the lifted radius by `s^2`, so a
/// single square-root correction is exact in reals; one Newton repeat absorbs
/// the floating-point error of the radius computation itself.
fn rescale_to_radius(a: &mut MatTuple, chain: &MarkovChain, target: f64) -> Result<()> {
    for _ in 0..2 {
        let rho = ops::spectral_radius_gamma(chain, a, None);
        if (rho - target).abs() <= RADIUS_TOL {
            return Ok(());
        }
        if !(rho > f64::MIN_POSITIVE) || !rho.is_finite() {
            return Err(Error::GenerationFailed {
                context: format!("open-loop radius {rho} cannot be rescaled"),
            });
        }
        *a = a.scale((target / rho).sqrt());
    }
    let rho = ops::spectral_radius_gamma(chain, a, None);
    if (rho - target).abs() <= RADIUS_TOL {
        Ok(())
    } else {
        Err(Error::GenerationFailed {
            context: format!("radius {rho} missed target {target} after rescaling"),
        })
    }
}
