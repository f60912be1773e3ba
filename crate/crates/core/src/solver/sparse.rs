//! Sparse Jacobians in compressed-column form and their LU factorization.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::Col;

use crate::error::{Error, Result};

/// Square sparse matrix assembled from `(row, col, value)` entries;
/// repeated entries are summed.
#[derive(Debug, Clone)]
pub struct SparseJacobian {
    mat: SparseColMat<usize, f64>,
}

/// Fill-reducing ordering and elimination structure, reusable for every
/// matrix with the same sparsity pattern.
#[derive(Debug, Clone)]
pub struct Pattern(SymbolicLu<usize>);

impl SparseJacobian {
    pub fn from_entries(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let t: Vec<Triplet<usize, usize, f64>> = entries.iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
        let mat = SparseColMat::try_new_from_triplets(n, n, &t)
            .map_err(|e| Error::InvalidInput(format!("sparse assembly: {e:?}")))?;
        Ok(Self { mat })
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mat.get(i, j).copied().unwrap_or(0.0)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let xc = Col::<f64>::from_fn(x.len(), |i| x[i]);
        let y = &self.mat * &xc;
        (0..y.nrows()).map(|i| y[i]).collect()
    }

    pub fn pattern(&self) -> Result<Pattern> {
        SymbolicLu::try_new(self.mat.symbolic())
            .map(Pattern)
            .map_err(|e| Error::InvalidInput(format!("symbolic factorization: {e:?}")))
    }

    pub fn factor(&self) -> Result<SparseLu> {
        self.factor_with(&self.pattern()?)
    }

    /// LU with partial pivoting, reusing a previously computed pattern.
    pub fn factor_with(&self, pattern: &Pattern) -> Result<SparseLu> {
        let lu = Lu::try_new_with_symbolic(pattern.0.clone(), self.mat.as_ref())
            .map_err(|_| Error::SingularJacobian { column: 0 })?;
        Ok(SparseLu { lu })
    }
}

#[derive(Debug)]
pub struct SparseLu {
    lu: Lu<usize, f64>,
}

impl SparseLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let bc = Col::<f64>::from_fn(b.len(), |i| b[i]);
        let x = self.lu.solve(&bc);
        (0..x.nrows()).map(|i| x[i]).collect()
    }
}
