//! Hermitian Toeplitz systems `V R(t) = W(t)` with one matrix and many
//! right-hand sides, one per fine-grid point of the unit interval.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seqalg::DiscreteSequence;

/// `V = [v[i - j]]` of size `(m + 1) x (m + 1)` plus the segments `W_n`.
#[derive(Clone, Debug)]
pub struct ToeplitzSystem<T: Scalar = f64> {
    lags: DiscreteSequence<T>,
    matrix: DMatrix<T>,
    rhs: Vec<Vec<T>>,
    min_eigenvalue: f64,
}

impl<T: Scalar> ToeplitzSystem<T> {
    /// Builds the system from lags `v[-m..=m]` and `m + 1` right-hand side
    /// segments of equal length. Fails unless `v[-n] = conj(v[n])` exactly.
    pub fn new(v: &DiscreteSequence<T>, rhs: Vec<Vec<T>>) -> Result<Self> {
        if rhs.is_empty() {
            return Err(Error::InvalidArgument("no right-hand side segments".into()));
        }
        let m = rhs.len() as i64 - 1;
        let points = rhs[0].len();
        if rhs.iter().any(|w| w.len() != points) {
            return Err(Error::InvalidArgument(
                "right-hand side segments differ in length".into(),
            ));
        }
        let lags = v.restrict(-m, m);
        for n in 0..=m {
            if lags.get(-n) != lags.get(n).conjugate() {
                return Err(Error::NotHermitian);
            }
        }
        let dim = rhs.len();
        let matrix = DMatrix::from_fn(dim, dim, |i, j| lags.get(i as i64 - j as i64));
        if matrix != matrix.adjoint() {
            return Err(Error::NotHermitian);
        }
        let min_eigenvalue = SymmetricEigen::new(matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            lags,
            matrix,
            rhs,
            min_eigenvalue,
        })
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    /// `v[0..=m]`.
    pub fn first_column(&self) -> Vec<T> {
        (0..self.dim() as i64).map(|n| self.lags.get(n)).collect()
    }

    /// `v[0], v[-1], .., v[-m]`.
    pub fn first_row(&self) -> Vec<T> {
        (0..self.dim() as i64).map(|n| self.lags.get(-n)).collect()
    }

    pub fn rhs(&self) -> &[Vec<T>] {
        &self.rhs
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn points(&self) -> usize {
        self.rhs[0].len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    fn factor(&self) -> Result<Cholesky<T, Dyn>> {
        let not_pd = Error::NotPositiveDefinite {
            min_eigenvalue: self.min_eigenvalue,
        };
        if self.min_eigenvalue.is_nan() || self.min_eigenvalue <= 0.0 {
            return Err(not_pd);
        }
        Cholesky::new(self.matrix.clone()).ok_or(not_pd)
    }

    /// `max_t |V R(t) - W(t)|` for candidate segments `r`.
    pub fn residual(&self, r: &[Vec<T>]) -> f64 {
        (0..self.points())
            .map(|k| {
                let x = DVector::from_fn(self.dim(), |i, _| r[i][k]);
                let b = DVector::from_fn(self.dim(), |i, _| self.rhs[i][k]);
                (&self.matrix * x - b)
                    .iter()
                    .map(|e| e.modulus())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Solves `V R(t) = W(t)` at every grid point with a single Cholesky
/// factorization of `V`. Returns the segments `R_0..R_m`.
pub fn solve_segments<T: Scalar>(sys: &ToeplitzSystem<T>) -> Result<Vec<Vec<T>>> {
    let chol = sys.factor()?;
    let dim = sys.dim();
    let columns: Vec<DVector<T>> = (0..sys.points())
        .into_par_iter()
        .map(|k| chol.solve(&DVector::from_fn(dim, |i, _| sys.rhs[i][k])))
        .collect();
    Ok((0..dim)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect())
}
