//! Finite Markov chains driving the mode process of a jump system.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerance on probability normalization checks.
const PROB_TOL: f64 = 1e-12;

/// Row-stochastic transition matrix plus an everywhere-positive initial
/// distribution over modes.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    transition: DMatrix<f64>,
    initial_dist: DVector<f64>,
}

impl MarkovChain {
    /// Validates and wraps a transition matrix and initial distribution.
    ///
    /// Requirements: `transition` is square with nonnegative entries and rows
    /// summing to 1 within 1e-12; `initial_dist` has matching length, strictly
    /// positive entries and sums to 1 within 1e-12. Zero-probability initial
    /// modes are rejected outright rather than projected away.
    pub fn new(transition: DMatrix<f64>, initial_dist: DVector<f64>) -> Result<Self> {
        let n = transition.nrows();
        if n == 0 {
            return Err(Error::invalid("transition matrix", "needs at least one mode"));
        }
        if transition.ncols() != n {
            return Err(Error::dim(format!(
                "transition matrix is {}x{}, must be square",
                n,
                transition.ncols()
            )));
        }
        if initial_dist.len() != n {
            return Err(Error::dim(format!(
                "initial distribution has {} entries for {} modes",
                initial_dist.len(),
                n
            )));
        }
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                let p = transition[(i, j)];
                if !(p >= 0.0) {
                    return Err(Error::invalid(
                        "transition matrix",
                        format!("entry ({i},{j}) = {p} is negative or NaN"),
                    ));
                }
                row_sum += p;
            }
            if (row_sum - 1.0).abs() > PROB_TOL {
                return Err(Error::invalid(
                    "transition matrix",
                    format!("row {i} sums to {row_sum}, not 1"),
                ));
            }
        }
        let mut dist_sum = 0.0;
        for i in 0..n {
            let p = initial_dist[i];
            if !(p > 0.0) {
                return Err(Error::invalid(
                    "initial distribution",
                    format!("entry {i} = {p} must be strictly positive"),
                ));
            }
            dist_sum += p;
        }
        if (dist_sum - 1.0).abs() > PROB_TOL {
            return Err(Error::invalid(
                "initial distribution",
                format!("sums to {dist_sum}, not 1"),
            ));
        }
        Ok(MarkovChain {
            transition,
            initial_dist,
        })
    }

    /// Chain with uniform transition rows and uniform initial distribution.
    pub fn uniform(n: usize) -> Result<Self> {
        let p = 1.0 / n as f64;
        Self::new(
            DMatrix::from_element(n, n, p),
            DVector::from_element(n, p),
        )
    }

    /// Number of modes.
    pub fn num_modes(&self) -> usize {
        self.transition.nrows()
    }

    /// Transition probability from mode `i` to mode `j`.
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.transition[(i, j)]
    }

    /// Row-stochastic transition matrix.
    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    /// Initial distribution over modes.
    pub fn initial_dist(&self) -> &DVector<f64> {
        &self.initial_dist
    }

    /// Smallest initial-mode probability; strictly positive by construction.
    pub fn min_initial_prob(&self) -> f64 {
        self.initial_dist.iter().fold(f64::INFINITY, |a, &p| a.min(p))
    }
}
