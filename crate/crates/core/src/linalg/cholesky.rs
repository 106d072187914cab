//! Cholesky factorization, shifted resolvents, and the symmetric-definite
//! generalized eigenproblem.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::eigen::{eigh, EigenDecomposition};
use crate::linalg::matrix::{dot, norm_sq, Matrix, SymmetricMatrix};

/// `M = L L^T` with `L` lower triangular.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    pub fn factor(m: &SymmetricMatrix) -> Result<Self> {
        let n = m.order();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut diag = m.get(j, j);
            for k in 0..j {
                diag -= l[(j, k)] * l[(j, k)];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite { index: j, pivot: diag });
            }
            let ljj = diag.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = m.get(i, j);
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Self { l })
    }

    pub fn order(&self) -> usize {
        self.l.rows()
    }

    pub fn lower(&self) -> &Matrix {
        &self.l
    }

    /// Solves `L z = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.order();
        let mut z = b.to_vec();
        for i in 0..n {
            let row = self.l.row(i);
            let s = dot(&row[..i], &z[..i]);
            z[i] = (z[i] - s) / row[i];
        }
        z
    }

    /// Solves `L^T x = z`.
    pub fn backward(&self, z: &[f64]) -> Vec<f64> {
        let n = self.order();
        let mut x = z.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for (k, xk) in x.iter().enumerate().skip(i + 1) {
                s -= self.l[(k, i)] * xk;
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.backward(&self.forward(b))
    }
}

/// Which side of the spectrum the resolvent's shift sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierSide {
    /// `shift * I - M`, the shift lies above the spectrum.
    Upper,
    /// `M - shift * I`, the shift lies below the spectrum.
    Lower,
}

/// A factored barrier resolvent `(shift I - M)^{-1}` or `(M - shift I)^{-1}`.
#[derive(Debug, Clone)]
pub struct Resolvent {
    chol: Cholesky,
    shift: f64,
    side: BarrierSide,
}

impl Resolvent {
    pub fn new(m: &SymmetricMatrix, shift: f64, side: BarrierSide) -> Result<Self> {
        let shifted = match side {
            BarrierSide::Upper => m.scaled(-1.0).shifted(shift),
            BarrierSide::Lower => m.shifted(-shift),
        };
        Ok(Self {
            chol: Cholesky::factor(&shifted)?,
            shift,
            side,
        })
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn side(&self) -> BarrierSide {
        self.side
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.chol.solve(x)
    }

    /// `(<R x, x>, <R^2 x, x>)` for the resolvent `R`, from one forward and
    /// one backward substitution.
    pub fn quadratic_forms(&self, x: &[f64]) -> (f64, f64) {
        let z = self.chol.forward(x);
        let w = self.chol.backward(&z);
        (norm_sq(&z), norm_sq(&w))
    }
}

/// Applies a barrier resolvent to every right-hand side, reusing one
/// factorization.
pub fn resolvent_apply(m: &SymmetricMatrix, shift: f64, side: BarrierSide, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = m.order();
    if let Some(bad) = rhs.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bad.len(),
        });
    }
    let r = Resolvent::new(m, shift, side)?;
    Ok(rhs.par_iter().map(|x| r.apply(x)).collect())
}

/// Generalized eigenvalues of the pencil `(a, b)` with `b` positive definite,
/// via `L^{-1} a L^{-T}` where `b = L L^T`. Eigenvalues descending.
pub fn generalized_eigh(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let n = a.order();
    if b.order() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.order(),
        });
    }
    let chol = Cholesky::factor(b)?;
    // Y = L^{-1} A, then C = L^{-1} Y^T = L^{-1} A L^{-T}.
    let mut y = Matrix::zeros(n, n);
    for j in 0..n {
        let col = chol.forward(&a.as_matrix().column(j));
        for i in 0..n {
            y[(i, j)] = col[i];
        }
    }
    let mut c = Matrix::zeros(n, n);
    for j in 0..n {
        let col = chol.forward(y.row(j));
        for i in 0..n {
            c[(i, j)] = col[i];
        }
    }
    eigh(&SymmetricMatrix::symmetrize(&c))
}
