use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::bss::{check_eps, eps_for_ratio, iteration_count, BssSparsifier};
use crate::error::{Error, Result};
use crate::linalg::{dot, eigh, norm_sq, Frame};

/// `C(n, k)` as a float; exact for the sizes used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All multisets of size `degree` from `0..n`, as nondecreasing index lists.
pub fn monomial_exponents(n: usize, degree: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            rec(n, left - 1, j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, degree, 0, &mut Vec::new(), &mut out);
    out
}

/// Orthonormal basis of the span of `columns` by Gram-Schmidt with column
/// pivoting and one reorthogonalization pass. Columns whose residual falls
/// to `count * f64::EPSILON * max_norm` or below are treated as dependent.
pub fn orthonormal_span(columns: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let max_norm = columns.iter().map(|c| norm_sq(c).sqrt()).fold(0.0, f64::max);
    let tol = columns.len() as f64 * f64::EPSILON * max_norm;
    let mut rest: Vec<Vec<f64>> = columns.to_vec();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while !rest.is_empty() {
        let (pos, norm) =
            rest.iter()
                .map(|c| norm_sq(c).sqrt())
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |best, (i, v)| if v > best.1 { (i, v) } else { best },
                );
        if norm <= tol {
            break;
        }
        let mut q = rest.swap_remove(pos);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&q, b);
                q.iter_mut().zip(b).for_each(|(v, w)| *v -= c * w);
            }
        }
        let len = norm_sq(&q).sqrt();
        if len <= tol {
            continue;
        }
        q.iter_mut().for_each(|v| *v /= len);
        for r in &mut rest {
            let c = dot(r, &q);
            r.iter_mut().zip(&q).for_each(|(v, w)| *v -= c * w);
        }
        basis.push(q);
    }
    basis
}

/// Output of [`embed_lp_even`]: the coordinates kept and their weights.
#[derive(Debug, Clone, Serialize)]
pub struct LpEmbedding {
    pub p: usize,
    /// Kept coordinates of `R^m`.
    pub selected: Vec<usize>,
    /// `s_i` for each kept coordinate.
    pub weights: Vec<f64>,
    pub monomial_count: usize,
    /// Dimension of the span of the degree `p/2` products.
    pub dim: usize,
    /// `C(n + p/2 - 1, p/2)`.
    pub dim_bound: f64,
    pub eps0: f64,
    pub support_bound: usize,
    /// Extremes of `sum s_i y_i^2 / sum y_i^2` over the product span.
    pub certified_min: f64,
    pub certified_max: f64,
    /// `1 + eps p / 4`.
    pub ratio_bound: f64,
}

impl LpEmbedding {
    /// `x -> (s_i^{1/p} x_i)` over the kept coordinates.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.selected
            .iter()
            .zip(&self.weights)
            .map(|(&i, &s)| s.powf(1.0 / self.p as f64) * x[i])
            .collect()
    }

    /// `|f(x)|_p / |x|_p`.
    pub fn distortion(&self, x: &[f64]) -> f64 {
        lp_norm(&self.apply(x), self.p as f64) / lp_norm(x, self.p as f64)
    }

    /// Extremes of [`distortion`](Self::distortion) over `count` random
    /// Gaussian combinations of `basis`.
    pub fn sampled_distortion<R: Rng + ?Sized>(&self, basis: &[Vec<f64>], count: usize, rng: &mut R) -> (f64, f64) {
        let m = basis.first().map_or(0, Vec::len);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..count {
            let mut x = vec![0.0; m];
            for b in basis {
                let g: f64 = StandardNormal.sample(rng);
                x.iter_mut().zip(b).for_each(|(v, w)| *v += g * w);
            }
            if x.iter().all(|&v| v == 0.0) {
                continue;
            }
            let r = self.distortion(&x);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        (lo, hi)
    }
}

pub fn lp_norm(x: &[f64], p: f64) -> f64 {
    x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Reduces the `l_p^m` coordinates carrying the subspace spanned by
/// `basis` (each of length `m`) for even `p >= 4`. For every `x` in the
/// span, `|x|_p <= |f(x)|_p <= (1 + eps p / 4)^{1/p} |x|_p`; this is
/// certified on the whole span through the quadratic sandwich on the
/// degree `p/2` product space.
pub fn embed_lp_even(basis: &[Vec<f64>], p: usize, eps: f64) -> Result<LpEmbedding> {
    check_eps(eps)?;
    if p < 4 || !p.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("p = {p} must be even and at least 4")));
    }
    let n = basis.len();
    if n == 0 {
        return Err(Error::InvalidArgument("basis is empty".into()));
    }
    let m = basis[0].len();
    if let Some(b) = basis.iter().find(|b| b.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: b.len(),
        });
    }
    if orthonormal_span(basis).len() < n {
        return Err(Error::Validation("basis vectors are linearly dependent".into()));
    }

    let half = p / 2;
    let exponents = monomial_exponents(n, half);
    let monomials: Vec<Vec<f64>> = exponents
        .iter()
        .map(|js| (0..m).map(|i| js.iter().map(|&j| basis[j][i]).product()).collect())
        .collect();
    let q = orthonormal_span(&monomials);
    let d = q.len();
    let frame = Frame::new(d, (0..m).map(|i| q.iter().map(|v| v[i]).collect()).collect())?.certify_isotropy()?;

    let ratio_bound = 1.0 + eps * p as f64 / 4.0;
    let eps0 = eps_for_ratio(ratio_bound)?;
    let s = BssSparsifier::new(eps0)?
        .keep_trace(false)
        .run(&frame)?
        .unit_floor_weights();
    let certified = eigh(&frame.weighted_operator(|i| s.get(i)))?;
    let (lo, hi) = (certified.lambda_min(), certified.lambda_max());
    if lo < 1.0 - 1e-8 || hi > ratio_bound + 1e-8 {
        return Err(Error::Certification(format!(
            "quadratic sandwich [{lo}, {hi}] outside [1, {ratio_bound}]"
        )));
    }
    Ok(LpEmbedding {
        p,
        selected: s.indices(),
        weights: s.iter().map(|(_, w)| w).collect(),
        monomial_count: exponents.len(),
        dim: d,
        dim_bound: binomial(n + half - 1, half),
        eps0,
        support_bound: iteration_count(d, eps0),
        certified_min: lo,
        certified_max: hi,
        ratio_bound,
    })
}
