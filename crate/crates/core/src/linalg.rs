//! Small dense linear algebra for low-dimensional covariance work.
//!
//! Everything here targets matrices of dimension at most roughly ten: the
//! covariance structure of a mixture, not general numerical linear algebra.
//! The central object is the Cholesky factor, which provides positive
//! definiteness validation, log-determinants, quadratic forms with the
//! inverse, and the linear map used to color Gaussian samples.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dense square matrix, row-major.
///
/// Serialized as a nested array of rows so configurations can spell out
/// covariance matrices literally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Matrix::from_rows(&rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        (0..m.dim)
            .map(|i| m.data[i * m.dim..(i + 1) * m.dim].to_vec())
            .collect()
    }
}

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidParams("matrix must have at least one row".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::InvalidParams(format!(
                    "matrix rows must all have length {dim}, found {}",
                    row.len()
                )));
            }
            for &x in row {
                if !x.is_finite() {
                    return Err(Error::InvalidParams("matrix entries must be finite".into()));
                }
                data.push(x);
            }
        }
        Ok(Matrix { dim, data })
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Matrix { dim, data }
    }

    /// Diagonal matrix from its diagonal entries.
    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParams("diagonal must be non-empty".into()));
        }
        let dim = entries.len();
        let mut m = Matrix::identity(dim);
        for (i, &d) in entries.iter().enumerate() {
            m.data[i * dim + i] = d;
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let a = self.get(i, j);
                let b = self.get(j, i);
                if (a - b).abs() > tol * a.abs().max(b.abs()).max(1.0) {
                    return false;
                }
            }
        }
        true
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "matrix of dimension {} applied to vector of length {}",
                self.dim,
                v.len()
            )));
        }
        Ok((0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.get(i, j) * v[j])
                    .sum()
            })
            .collect())
    }

    /// Quadratic form `v' M v`.
    pub fn quadratic_form(&self, v: &[f64]) -> Result<f64> {
        Ok(dot(&self.matvec(v)?, v))
    }

    /// Cholesky factorization `M = L L'` for symmetric positive definite `M`.
    pub fn cholesky(&self) -> Result<Cholesky> {
        if !self.is_symmetric(1e-12) {
            return Err(Error::InvalidParams("covariance matrix must be symmetric".into()));
        }
        let n = self.dim;
        let mut lower = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.get(i, j);
                for k in 0..j {
                    sum -= lower[i * n + k] * lower[j * n + k];
                }
                if i == j {
                    if sum <= 0.0 {
                        return Err(Error::InvalidParams(
                            "covariance matrix must be positive definite".into(),
                        ));
                    }
                    lower[i * n + i] = sum.sqrt();
                } else {
                    lower[i * n + j] = sum / lower[j * n + j];
                }
            }
        }
        Ok(Cholesky { dim: n, lower })
    }
}

/// Lower-triangular Cholesky factor of a positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `log det M` of the factored matrix.
    pub fn ln_det(&self) -> f64 {
        (0..self.dim)
            .map(|i| 2.0 * self.lower[i * self.dim + i].ln())
            .sum()
    }

    /// Solves `L y = v` by forward substitution.
    pub fn solve_lower(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "factor of dimension {} applied to vector of length {}",
                self.dim,
                v.len()
            )));
        }
        let n = self.dim;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut sum = v[i];
            for k in 0..i {
                sum -= self.lower[i * n + k] * y[k];
            }
            y[i] = sum / self.lower[i * n + i];
        }
        Ok(y)
    }

    /// Quadratic form with the inverse of the factored matrix,
    /// `v' M^{-1} v = |L^{-1} v|^2`.
    pub fn inv_quadratic_form(&self, v: &[f64]) -> Result<f64> {
        let y = self.solve_lower(v)?;
        Ok(dot(&y, &y))
    }

    /// Applies the factor: `L v`.  Maps standard Gaussian vectors to
    /// vectors with the factored covariance.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "factor of dimension {} applied to vector of length {}",
                self.dim,
                v.len()
            )));
        }
        let n = self.dim;
        Ok((0..n)
            .map(|i| (0..=i).map(|k| self.lower[i * n + k] * v[k]).sum())
            .collect())
    }
}

/// Euclidean inner product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
