//! Problem instances, policies and value certificates.
//!
//! An [`MjlsProblem`] couples per-mode linear dynamics `x⁺ = A_i x + B_i u`
//! with per-mode quadratic stage costs `xᵀQ_i x + uᵀR_i u`, a Markov chain
//! over the modes and the second moment `Σ₀ = E[x₀x₀ᵀ]` of the initial state.
//! A [`Policy`] is the per-mode linear state feedback `u = -K_i x`.

use nalgebra::DMatrix;

use crate::chain::MarkovChain;
use crate::error::{Error, Result};
use crate::tuple::MatTuple;

/// Relative tolerance for symmetry checks at construction.
const SYM_TOL: f64 = 1e-10;

/// Complete description of a jump-linear quadratic control problem.
#[derive(Debug, Clone, PartialEq)]
pub struct MjlsProblem {
    a: MatTuple,
    b: MatTuple,
    q: MatTuple,
    r: MatTuple,
    chain: MarkovChain,
    sigma0: DMatrix<f64>,
}

impl MjlsProblem {
    /// Validates shape compatibility and definiteness, then wraps the data.
    ///
    /// Requirements: all tuples have as many blocks as the chain has modes,
    /// `A` is d x d, `B` is d x k, `Q` (d x d), `R` (k x k) and `sigma0`
    /// (d x d) are symmetric positive definite.
    pub fn new(
        a: MatTuple,
        b: MatTuple,
        q: MatTuple,
        r: MatTuple,
        chain: MarkovChain,
        sigma0: DMatrix<f64>,
    ) -> Result<Self> {
        let n = chain.num_modes();
        let d = a.nrows();
        let k = b.ncols();
        for (name, t) in [("A", &a), ("B", &b), ("Q", &q), ("R", &r)] {
            if t.len() != n {
                return Err(Error::dim(format!(
                    "{name} has {} blocks for a {n}-mode chain",
                    t.len()
                )));
            }
        }
        if a.ncols() != d {
            return Err(Error::dim(format!("A blocks are {}x{}, must be square", d, a.ncols())));
        }
        if b.nrows() != d {
            return Err(Error::dim(format!(
                "B blocks are {}x{k}, rows must match the state dimension {d}",
                b.nrows()
            )));
        }
        if q.nrows() != d || q.ncols() != d {
            return Err(Error::dim(format!(
                "Q blocks are {}x{}, must be {d}x{d}",
                q.nrows(),
                q.ncols()
            )));
        }
        if r.nrows() != k || r.ncols() != k {
            return Err(Error::dim(format!(
                "R blocks are {}x{}, must be {k}x{k}",
                r.nrows(),
                r.ncols()
            )));
        }
        if sigma0.nrows() != d || sigma0.ncols() != d {
            return Err(Error::dim(format!(
                "initial covariance is {}x{}, must be {d}x{d}",
                sigma0.nrows(),
                sigma0.ncols()
            )));
        }
        for (i, block) in q.blocks().iter().enumerate() {
            require_spd(block, &format!("Q block {i}"))?;
        }
        for (i, block) in r.blocks().iter().enumerate() {
            require_spd(block, &format!("R block {i}"))?;
        }
        require_spd(&sigma0, "initial covariance")?;
        Ok(MjlsProblem {
            a,
            b,
            q,
            r,
            chain,
            sigma0,
        })
    }

    /// Number of modes.
    pub fn num_modes(&self) -> usize {
        self.chain.num_modes()
    }

    /// State dimension d.
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    /// Input dimension k.
    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    /// Per-mode state matrices.
    pub fn a(&self) -> &MatTuple {
        &self.a
    }

    /// Per-mode input matrices.
    pub fn b(&self) -> &MatTuple {
        &self.b
    }

    /// Per-mode state cost weights.
    pub fn q(&self) -> &MatTuple {
        &self.q
    }

    /// Per-mode input cost weights.
    pub fn r(&self) -> &MatTuple {
        &self.r
    }

    /// Mode process.
    pub fn chain(&self) -> &MarkovChain {
        &self.chain
    }

    /// Second moment of the initial state.
    pub fn sigma0(&self) -> &DMatrix<f64> {
        &self.sigma0
    }

    /// Checks that `policy` has one k x d gain per mode of this problem.
    pub fn check_policy(&self, policy: &Policy) -> Result<()> {
        let k = &policy.k;
        if k.len() != self.num_modes() || k.nrows() != self.input_dim() || k.ncols() != self.state_dim()
        {
            return Err(Error::dim(format!(
                "policy has {} gains of {}x{}, problem needs {} of {}x{}",
                k.len(),
                k.nrows(),
                k.ncols(),
                self.num_modes(),
                self.input_dim(),
                self.state_dim()
            )));
        }
        Ok(())
    }

    /// Checks that `v` is a tuple of d x d blocks, one per mode.
    pub(crate) fn check_state_tuple(&self, v: &MatTuple, what: &str) -> Result<()> {
        let d = self.state_dim();
        if v.len() != self.num_modes() || v.nrows() != d || v.ncols() != d {
            return Err(Error::dim(format!(
                "{what} has {} blocks of {}x{}, problem needs {} of {d}x{d}",
                v.len(),
                v.nrows(),
                v.ncols(),
                self.num_modes()
            )));
        }
        Ok(())
    }
}

/// Per-mode linear state feedback `u = -K_i x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    /// Gain tuple; block `i` acts while the chain is in mode `i`.
    pub k: MatTuple,
}

impl Policy {
    /// Wraps a gain tuple.
    pub fn new(k: MatTuple) -> Self {
        Policy { k }
    }

    /// All-zero gains for `problem`; open-loop control.
    pub fn zeros(problem: &MjlsProblem) -> Self {
        Policy {
            k: MatTuple::zeros(
                problem.num_modes(),
                problem.input_dim(),
                problem.state_dim(),
            ),
        }
    }
}

/// Value matrices of a policy together with its cost and the residual of the
/// defining coupled Lyapunov equation.
#[derive(Debug, Clone)]
pub struct ValueCertificate {
    /// Per-mode value matrices, symmetric positive semidefinite.
    pub p: MatTuple,
    /// Expected infinite-horizon cost of the policy.
    pub cost: f64,
    /// Certified upper bound on the blockwise spectral norm of the equation
    /// residual; at most the solver tolerance.
    pub lyap_residual: f64,
}

fn require_spd(m: &DMatrix<f64>, what: &str) -> Result<()> {
    let scale = 1.0 + m.amax();
    let asym = (m - m.transpose()).amax();
    if asym > SYM_TOL * scale {
        return Err(Error::invalid(
            what.to_string(),
            format!("not symmetric: max asymmetry {asym:.3e}"),
        ));
    }
    let sym = (m + m.transpose()) * 0.5;
    if nalgebra::Cholesky::new(sym).is_none() {
        return Err(Error::invalid(what.to_string(), "not positive definite"));
    }
    Ok(())
}
