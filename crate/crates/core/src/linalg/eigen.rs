//! Dense symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form followed by the implicit-shift
//! QL iteration, after the Algol procedures `tred2`/`tql2` of Bowdler, Martin,
//! Reinsch and Wilkinson (Handbook for Automatic Computation, Vol. II) as
//! carried by EISPACK and JAMA.

use crate::error::{Error, Result};
use crate::linalg::matrix::{Matrix, SymmetricMatrix};

/// QL iterations allowed per unit of matrix order.
pub const SWEEPS_PER_ORDER: usize = 50;

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Eigenvalues, sorted descending.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector paired with `values[k]`.
    pub vectors: Matrix,
}

impl EigenDecomposition {
    pub fn order(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    pub fn lambda_max(&self) -> f64 {
        self.values[0]
    }

    pub fn lambda_min(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `V^T x`: coordinates of `x` in the eigenbasis.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        self.vectors.t_matvec(x)
    }

    /// `sum_k f(lambda_k) v_k v_k^T`.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> SymmetricMatrix {
        let n = self.order();
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        SymmetricMatrix::from_upper_fn(n, |i, j| {
            (0..n)
                .map(|k| fv[k] * self.vectors[(i, k)] * self.vectors[(j, k)])
                .sum()
        })
    }

    pub fn reconstruct(&self) -> SymmetricMatrix {
        self.spectral_map(|l| l)
    }

    /// Max-entry deviation of `V^T V` from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        self.vectors.gram().identity_residual()
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
pub fn eigh(m: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let n = m.order();
    if n == 0 {
        return Ok(EigenDecomposition {
            values: Vec::new(),
            vectors: Matrix::zeros(0, 0),
        });
    }
    let mut v = m.as_matrix().clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    ql_implicit(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(EigenDecomposition { values, vectors })
}

/// Eigenvalues only, descending.
pub fn eigenvalues(m: &SymmetricMatrix) -> Result<Vec<f64>> {
    Ok(eigh(m)?.values)
}

#[allow(clippy::needless_range_loop)]
fn tridiagonalize(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

#[allow(clippy::needless_range_loop)]
fn ql_implicit(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    let cap = SWEEPS_PER_ORDER * n;
    let mut total_iter = 0usize;

    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            loop {
                total_iter += 1;
                if total_iter > cap {
                    return Err(Error::NoConvergence {
                        order: n,
                        residual: e[l].abs(),
                    });
                }

                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for i in (l + 2)..n {
                    d[i] -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_has_unit_spectrum() {
        let ed = eigh(&SymmetricMatrix::identity(3)).unwrap();
        assert_eq!(ed.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_values_come_back_sorted_descending() {
        let ed = eigh(&SymmetricMatrix::diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(ed.values, vec![3.0, 2.0, 1.0]);
        // eigenvector for 2 is e_3
        assert_abs_diff_eq!(ed.vector(1)[2].abs(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn swap_matrix_has_plus_minus_one() {
        let m = SymmetricMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let ed = eigh(&m).unwrap();
        assert_abs_diff_eq!(ed.values[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ed.values[1], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn one_by_one_and_empty() {
        let ed = eigh(&SymmetricMatrix::diagonal(&[-4.5])).unwrap();
        assert_eq!(ed.values, vec![-4.5]);
        assert_eq!(ed.vectors[(0, 0)].abs(), 1.0);
        assert!(eigh(&SymmetricMatrix::zeros(0)).unwrap().values.is_empty());
    }

    #[test]
    fn reconstruction_and_orthonormality_on_a_dense_matrix() {
        let n = 12;
        let m = SymmetricMatrix::from_upper_fn(n, |i, j| {
            ((i * 7 + j * 3) % 11) as f64 - 5.0 + if i == j { 0.25 } else { 0.0 }
        });
        let ed = eigh(&m).unwrap();
        let back = ed.reconstruct();
        let scale = 1.0 + m.max_abs();
        assert!(back.sub(&m).unwrap().max_abs() <= 1e-10 * scale);
        assert!(ed.orthonormality_residual() <= 1e-10);
        assert!(ed.values.windows(2).all(|w| w[0] >= w[1]));
    }
}
