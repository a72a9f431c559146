//! N-tuples of equally shaped real matrices.
//!
//! A [`MatTuple`] holds one matrix per mode of a jump system and carries the
//! tuple norms used throughout the crate:
//!
//! * `‖V‖₁  = Σᵢ σ_max(Vᵢ)`   (sum of blockwise spectral norms)
//! * `‖V‖₂  = (Σᵢ tr VᵢᵀVᵢ)^½` (stacked Frobenius norm)
//! * `‖V‖∞  = maxᵢ σ_max(Vᵢ)`  (largest blockwise spectral norm)
//! * `Λ_min = minᵢ σ_min(Vᵢ)`  (smallest blockwise singular value)
//!
//! together with the trace inner product `⟨V,S⟩ = Σᵢ tr(VᵢᵀSᵢ)`, under which
//! the covariance-propagation and value operators of [`crate::ops`] are
//! adjoint to each other.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Ordered tuple of `N ≥ 1` real matrices, all of identical shape.
#[derive(Debug, Clone, PartialEq)]
pub struct MatTuple {
    blocks: Vec<DMatrix<f64>>,
}

impl MatTuple {
    /// Wraps `blocks` after checking that there is at least one block and all
    /// blocks share one shape.
    pub fn new(blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::invalid("matrix tuple", "needs at least one block"))?;
        let shape = first.shape();
        if let Some(bad) = blocks.iter().position(|b| b.shape() != shape) {
            return Err(Error::dim(format!(
                "tuple block {bad} is {}x{}, block 0 is {}x{}",
                blocks[bad].nrows(),
                blocks[bad].ncols(),
                shape.0,
                shape.1
            )));
        }
        Ok(MatTuple { blocks })
    }

    /// Tuple of `n` blocks read from `flat`, row-major entries mode by mode.
    pub fn from_row_major(n: usize, rows: usize, cols: usize, flat: &[f64]) -> Result<Self> {
        let per = rows * cols;
        if flat.len() != n * per {
            return Err(Error::dim(format!(
                "flat buffer has {} entries, {n} blocks of {rows}x{cols} need {}",
                flat.len(),
                n * per
            )));
        }
        Self::new(
            (0..n)
                .map(|i| DMatrix::from_row_slice(rows, cols, &flat[i * per..(i + 1) * per]))
                .collect(),
        )
    }

    /// Tuple of 1x1 blocks, one per entry of `values`.
    pub fn scalars(values: &[f64]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .map(|&v| DMatrix::from_element(1, 1, v))
                .collect(),
        )
    }

    /// Tuple of `n` zero blocks of shape `rows x cols`.
    pub fn zeros(n: usize, rows: usize, cols: usize) -> Self {
        MatTuple {
            blocks: (0..n).map(|_| DMatrix::zeros(rows, cols)).collect(),
        }
    }

    /// Tuple of `n` identity blocks of side `dim`.
    pub fn identity(n: usize, dim: usize) -> Self {
        MatTuple {
            blocks: (0..n).map(|_| DMatrix::identity(dim, dim)).collect(),
        }
    }

    /// Number of blocks (modes).
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    /// True when the tuple would be empty; never the case for a constructed value.
    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Rows of every block.
    pub fn nrows(&self) -> usize {
        self.blocks[0].nrows()
    }

    /// Columns of every block.
    pub fn ncols(&self) -> usize {
        self.blocks[0].ncols()
    }

    /// Block for mode `i` (zero-based).
    pub fn block(&self, i: usize) -> &DMatrix<f64> {
        &self.blocks[i]
    }

    /// All blocks in mode order.
    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    pub(crate) fn blocks_mut(&mut self) -> &mut [DMatrix<f64>] {
        &mut self.blocks
    }

    /// Blockwise transpose.
    pub fn transpose(&self) -> MatTuple {
        MatTuple {
            blocks: self.blocks.iter().map(|b| b.transpose()).collect(),
        }
    }

    /// Blockwise symmetrization `(Vᵢ + Vᵢᵀ)/2`; discards round-off asymmetry.
    pub fn symmetrized(&self) -> MatTuple {
        MatTuple {
            blocks: self
                .blocks
                .iter()
                .map(|b| (b + b.transpose()) * 0.5)
                .collect(),
        }
    }

    /// Sum of blockwise spectral norms.
    pub fn norm_one(&self) -> f64 {
        self.blocks.iter().map(spectral_norm).sum()
    }

    /// Frobenius norm of the stacked tuple.
    pub fn norm_two(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest blockwise spectral norm.
    pub fn norm_max(&self) -> f64 {
        self.blocks
            .iter()
            .map(spectral_norm)
            .fold(0.0, f64::max)
    }

    /// Smallest blockwise singular value.
    pub fn lambda_min(&self) -> f64 {
        self.blocks
            .iter()
            .map(smallest_singular_value)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest absolute entry across all blocks; cheap bound used by solvers.
    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.amax())
            .fold(0.0, f64::max)
    }

    /// Largest blockwise Frobenius norm; upper bound on [`Self::norm_max`]
    /// that avoids a singular value decomposition.
    pub(crate) fn frobenius_max(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm()).fold(0.0, f64::max)
    }

    /// Trace inner product `Σᵢ tr(VᵢᵀSᵢ)`.
    ///
    /// # Panics
    /// Panics when shapes differ; tuple arithmetic mirrors the panicking
    /// behavior of matrix arithmetic in `nalgebra`.
    pub fn inner(&self, other: &MatTuple) -> f64 {
        assert_eq!(
            (self.len(), self.nrows(), self.ncols()),
            (other.len(), other.nrows(), other.ncols()),
            "inner product of differently shaped tuples"
        );
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.dot(b))
            .sum()
    }

    /// Column-major vectorization of every block, stacked in mode order.
    pub fn to_stacked_vec(&self) -> DVector<f64> {
        let per = self.nrows() * self.ncols();
        let mut out = DVector::zeros(per * self.len());
        for (i, b) in self.blocks.iter().enumerate() {
            out.rows_mut(i * per, per).copy_from_slice(b.as_slice());
        }
        out
    }

    /// Inverse of [`Self::to_stacked_vec`] for `n` blocks of `rows x cols`.
    pub fn from_stacked_vec(n: usize, rows: usize, cols: usize, v: &DVector<f64>) -> Result<Self> {
        let per = rows * cols;
        if v.len() != n * per {
            return Err(Error::dim(format!(
                "stacked vector has length {}, expected {} blocks of {rows}x{cols}",
                v.len(),
                n
            )));
        }
        Ok(MatTuple {
            blocks: (0..n)
                .map(|i| DMatrix::from_column_slice(rows, cols, v.rows(i * per, per).as_slice()))
                .collect(),
        })
    }

    /// Blockwise linear combination `self + c * other`.
    ///
    /// # Panics
    /// Panics when shapes differ.
    pub fn axpy(&self, c: f64, other: &MatTuple) -> MatTuple {
        MatTuple {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a + b * c)
                .collect(),
        }
    }

    /// Blockwise scaling.
    pub fn scale(&self, c: f64) -> MatTuple {
        MatTuple {
            blocks: self.blocks.iter().map(|b| b * c).collect(),
        }
    }
}

impl std::ops::Add for &MatTuple {
    type Output = MatTuple;
    fn add(self, rhs: &MatTuple) -> MatTuple {
        self.axpy(1.0, rhs)
    }
}

impl std::ops::Sub for &MatTuple {
    type Output = MatTuple;
    fn sub(self, rhs: &MatTuple) -> MatTuple {
        self.axpy(-1.0, rhs)
    }
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().fold(0.0, |a, &s| a.max(s))
}

fn smallest_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values()
        .iter()
        .fold(f64::INFINITY, |a, &s| a.min(s))
}
