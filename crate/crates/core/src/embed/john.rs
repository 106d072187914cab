use serde::Serialize;

use crate::bss::{check_eps, eps_for_ratio, iteration_count, BssSparsifier};
use crate::error::{Error, Result};
use crate::linalg::{eigh, norm_sq, Frame, SymmetricMatrix};

const UNIT_TOL: f64 = 1e-10;
const IDENTITY_TOL: f64 = 1e-8;

/// Unit vectors `x_i` with weights `c_i > 0` such that
/// `sum c_i x_i x_i^T = I` and `sum c_i x_i = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JohnDecomposition {
    dim: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl JohnDecomposition {
    pub fn new(dim: usize, points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.is_empty() {
            return Err(Error::Validation(
                "decomposition needs a positive dimension and at least one point".into(),
            ));
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: weights.len(),
            });
        }
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
        if let Some((i, c)) = weights.iter().enumerate().find(|(_, &c)| !(c > 0.0) || !c.is_finite()) {
            return Err(Error::Validation(format!("weight {c} at index {i} is not positive")));
        }
        for (i, p) in points.iter().enumerate() {
            let dev = (norm_sq(p).sqrt() - 1.0).abs();
            if dev > UNIT_TOL {
                return Err(Error::Validation(format!("point {i} has norm off by {dev:e}")));
            }
        }
        let jd = Self { dim, points, weights };
        let residual = jd.identity_residual();
        if residual > IDENTITY_TOL {
            return Err(Error::Validation(format!(
                "sum c_i x_i x_i^T deviates from I by {residual:e}"
            )));
        }
        let center = jd.center_of_mass().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if center > IDENTITY_TOL {
            return Err(Error::Validation(format!("sum c_i x_i deviates from 0 by {center:e}")));
        }
        Ok(jd)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn operator(&self) -> SymmetricMatrix {
        let mut a = SymmetricMatrix::zeros(self.dim);
        for (x, &c) in self.points.iter().zip(&self.weights) {
            a.add_outer(c, x);
        }
        a
    }

    pub fn identity_residual(&self) -> f64 {
        self.operator().identity_residual()
    }

    /// `sum c_i x_i`, accumulated in storage order.
    pub fn center_of_mass(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        for (x, &c) in self.points.iter().zip(&self.weights) {
            for (a, v) in acc.iter_mut().zip(x) {
                *a += c * v;
            }
        }
        acc
    }
}

/// Output of [`approximate_john`].
#[derive(Debug, Clone, Serialize)]
pub struct JohnApproximation {
    /// `{+z_i, -z_i}` interleaved, each with weight `a_i`.
    pub decomposition: JohnDecomposition,
    pub eps0: f64,
    /// Number of input points kept, before symmetrization.
    pub support: usize,
    pub support_bound: usize,
    /// `|A - I|` for the reweighted operator `A`.
    pub operator_deviation: f64,
    pub identity_residual: f64,
}

/// Sparsifies a John decomposition to at most `ceil(n / eps0^2)` contact
/// pairs, where `eps0` makes the reweighted operator satisfy
/// `I <= A <= (1 + eps/4) I`.
///
/// The kept points are mapped to `z_i = A^{-1/2} x_i / |A^{-1/2} x_i|` with
/// weight `a_i = c_i s_i |A^{-1/2} x_i|^2 / 2` on each of `+z_i` and `-z_i`.
pub fn approximate_john(jd: &JohnDecomposition, eps: f64) -> Result<JohnApproximation> {
    check_eps(eps)?;
    let n = jd.dim;
    let ceiling = 1.0 + eps / 4.0;
    let eps0 = eps_for_ratio(ceiling)?;
    let frame = Frame::new(
        n,
        jd.points
            .iter()
            .zip(&jd.weights)
            .map(|(x, &c)| x.iter().map(|v| v * c.sqrt()).collect())
            .collect(),
    )?
    .certify_isotropy()?;
    let out = BssSparsifier::new(eps0)?.keep_trace(false).run(&frame)?;
    let s = out.unit_floor_weights();

    let mut a = SymmetricMatrix::zeros(n);
    for (i, si) in s.iter() {
        a.add_outer(si * jd.weights[i], &jd.points[i]);
    }
    let ed = eigh(&a)?;
    let operator_deviation = (ed.lambda_max() - 1.0).abs().max((ed.lambda_min() - 1.0).abs());
    if ed.lambda_min() < 1.0 - IDENTITY_TOL || ed.lambda_max() > ceiling + IDENTITY_TOL {
        return Err(Error::Certification(format!(
            "reweighted operator spectrum [{}, {}] outside [1, {ceiling}]",
            ed.lambda_min(),
            ed.lambda_max()
        )));
    }
    let inv_sqrt = ed.spectral_map(|l| 1.0 / l.sqrt());

    let mut points = Vec::with_capacity(2 * s.support());
    let mut weights = Vec::with_capacity(2 * s.support());
    for (i, si) in s.iter() {
        let y = inv_sqrt.matvec(&jd.points[i]);
        let len_sq = norm_sq(&y);
        let len = len_sq.sqrt();
        let z: Vec<f64> = y.iter().map(|v| v / len).collect();
        let ai = jd.weights[i] * si * len_sq / 2.0;
        points.push(z.iter().map(|v| -v).collect());
        points.push(z);
        weights.push(ai);
        weights.push(ai);
    }
    let decomposition = JohnDecomposition::new(n, points, weights)?;
    let identity_residual = decomposition.identity_residual();
    Ok(JohnApproximation {
        decomposition,
        eps0,
        support: s.support(),
        support_bound: iteration_count(n, eps0),
        operator_deviation,
        identity_residual,
    })
}
