use crate::error::{Error, Result};
use crate::linalg::eigen::eigh;
use crate::linalg::matrix::{dot, Matrix, SymmetricMatrix};

/// Max-entry deviation from the identity tolerated when certifying
/// `sum x_i x_i^T = I`.
pub const ISOTROPY_TOL: f64 = 1e-8;

/// An ordered list of vectors in `R^n`, optionally certified as a
/// decomposition of the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    ambient_dim: usize,
    vectors: Vec<Vec<f64>>,
    isotropy_certified: bool,
}

impl Frame {
    /// An empty frame is allowed (the edge frame of an edgeless graph); the
    /// operations that need vectors reject it.
    pub fn new(ambient_dim: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidArgument("frame dimension must be positive".into()));
        }
        if let Some(bad) = vectors.iter().find(|v| v.len() != ambient_dim) {
            return Err(Error::DimensionMismatch {
                expected: ambient_dim,
                got: bad.len(),
            });
        }
        if vectors.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("frame has a non-finite entry".into()));
        }
        Ok(Self {
            ambient_dim,
            vectors,
            isotropy_certified: false,
        })
    }

    /// The rows of `m` as frame vectors.
    pub fn from_rows(m: &Matrix) -> Result<Self> {
        Self::new(m.cols(), m.row_vectors())
    }

    pub fn standard_basis(n: usize) -> Result<Self> {
        let vectors = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        let mut f = Self::new(n, vectors)?;
        f.isotropy_certified = true;
        Ok(f)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    pub fn is_isotropy_certified(&self) -> bool {
        self.isotropy_certified
    }

    /// The frame operator `sum x_i x_i^T`.
    pub fn frame_operator(&self) -> SymmetricMatrix {
        self.weighted_operator(|_| 1.0)
    }

    /// `sum_i w(i) x_i x_i^T`.
    pub fn weighted_operator(&self, w: impl Fn(usize) -> f64) -> SymmetricMatrix {
        let mut a = SymmetricMatrix::zeros(self.ambient_dim);
        for (i, x) in self.vectors.iter().enumerate() {
            let wi = w(i);
            if wi != 0.0 {
                a.add_outer(wi, x);
            }
        }
        a
    }

    pub fn isotropy_residual(&self) -> f64 {
        self.frame_operator().identity_residual()
    }

    /// Checks `sum x_i x_i^T = I` and sets the certified flag.
    pub fn certify_isotropy(mut self) -> Result<Self> {
        let residual = self.isotropy_residual();
        if residual > ISOTROPY_TOL {
            return Err(Error::Certification(format!(
                "frame operator deviates from the identity by {residual:e}"
            )));
        }
        self.isotropy_certified = true;
        Ok(self)
    }
}

/// Coordinates on the range of a frame operator `A = V diag(lambda) V^T`,
/// restricted to the kept eigenpairs.
#[derive(Debug, Clone)]
pub struct ReductionMap {
    /// `n x r`, orthonormal columns spanning the range.
    basis: Matrix,
    sqrt_values: Vec<f64>,
}

impl ReductionMap {
    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn reduced_dim(&self) -> usize {
        self.sqrt_values.len()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// `Lambda^{-1/2} V^T x`: a frame vector in whitened coordinates.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.basis
            .t_matvec(x)
            .iter()
            .zip(&self.sqrt_values)
            .map(|(c, s)| c / s)
            .collect()
    }

    /// `Lambda^{1/2} V^T w`: the test vector with
    /// `<x, w> = <forward(x), dual(w)>` for every `x` in the range.
    pub fn dual(&self, w: &[f64]) -> Vec<f64> {
        self.basis
            .t_matvec(w)
            .iter()
            .zip(&self.sqrt_values)
            .map(|(c, s)| c * s)
            .collect()
    }

    /// `V Lambda^{1/2} y`, inverse of [`forward`](Self::forward) on the range.
    pub fn lift(&self, y: &[f64]) -> Vec<f64> {
        let scaled: Vec<f64> = y.iter().zip(&self.sqrt_values).map(|(a, s)| a * s).collect();
        self.basis.matvec(&scaled)
    }

    /// The `n x r` matrix of [`lift`](Self::lift).
    pub fn lift_matrix(&self) -> Matrix {
        Matrix::from_fn(self.ambient_dim(), self.reduced_dim(), |i, j| {
            self.basis[(i, j)] * self.sqrt_values[j]
        })
    }
}

/// `n * machine epsilon`.
pub fn default_rank_tol(n: usize) -> f64 {
    n as f64 * f64::EPSILON
}

/// Restricts a frame to the range of its frame operator and whitens it.
///
/// Eigenvalues at or below `rank_tol * lambda_1` are discarded; the returned
/// frame lives in `R^r` and is certified isotropic.
pub fn isotropic_reduce(frame: &Frame, rank_tol: f64) -> Result<(Frame, ReductionMap)> {
    if !(rank_tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "rank tolerance {rank_tol} must be nonnegative"
        )));
    }
    let ed = eigh(&frame.frame_operator())?;
    let top = ed.lambda_max();
    if !(top > 0.0) {
        return Err(Error::ZeroFrame);
    }
    let r = ed.values.iter().take_while(|&&l| l > rank_tol * top).count();
    if r == 0 {
        return Err(Error::ZeroFrame);
    }
    let n = frame.ambient_dim();
    let basis = Matrix::from_fn(n, r, |i, j| ed.vectors[(i, j)]);
    let sqrt_values = ed.values[..r].iter().map(|l| l.sqrt()).collect();
    let map = ReductionMap { basis, sqrt_values };
    let reduced = Frame::new(r, frame.vectors().iter().map(|x| map.forward(x)).collect())?;
    let reduced = reduced.certify_isotropy()?;
    Ok((reduced, map))
}

/// `sum_i <x_i, y>^2`.
pub fn frame_energy(frame: &Frame, y: &[f64]) -> f64 {
    frame.vectors().iter().map(|x| dot(x, y).powi(2)).sum()
}
