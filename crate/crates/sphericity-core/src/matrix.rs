//! Dense data containers: the n x p sample matrix and small square matrices.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// An n x p data matrix, rows are observations.
///
/// All entries are finite by construction; operations downstream rely on
/// this and on `p >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: Vec<f64>, // row-major
    n: usize,
    p: usize,
}

impl SampleMatrix {
    /// Wrap a row-major buffer of length `n * p`.
    pub fn new(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidInput("dimension p must be at least 1"));
        }
        if n == 0 {
            return Err(Error::InvalidInput("sample must contain at least one row"));
        }
        if data.len() != n * p {
            return Err(Error::InvalidInput("buffer length must equal n * p"));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite"));
        }
        Ok(SampleMatrix { data, n, p })
    }

    /// Build from per-observation rows, which must all have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("sample must contain at least one row"));
        }
        let p = rows[0].len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidInput("all rows must have the same length"));
        }
        let mut data = Vec::with_capacity(n * p);
        for r in rows {
            data.extend_from_slice(r);
        }
        SampleMatrix::new(n, p, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Observation `i` as a slice of length `p`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Number of unordered observation pairs that are exactly equal.
    pub fn duplicate_pair_count(&self) -> usize {
        let mut ties = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.row(i) == self.row(j) {
                    ties += 1;
                }
            }
        }
        ties
    }
}

/// A dense square matrix with row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    data: Vec<f64>,
    dim: usize,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        SquareMatrix {
            data: vec![0.0; dim * dim],
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    #[inline]
    pub fn add_assign(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] += v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Sum of squared entries; equals `tr(M^T M)` and, for symmetric `M`,
    /// `tr(M^2)`.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                if libm::fabs(self.get(i, j) - self.get(j, i)) > tol {
                    return false;
                }
            }
        }
        true
    }
}
