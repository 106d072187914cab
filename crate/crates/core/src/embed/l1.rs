use std::collections::HashMap;

use serde::Serialize;

use crate::bss::{check_eps, eps_for_ratio, iteration_count, BssSparsifier};
use crate::error::{Error, Result};
use crate::linalg::Frame;

/// A finite `l_1` metric written as a nonnegative combination of cut
/// pseudometrics `|1_E(i) - 1_E(j)|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutDecomposition {
    n: usize,
    cuts: Vec<(Vec<usize>, f64)>,
}

impl CutDecomposition {
    pub fn point_count(&self) -> usize {
        self.n
    }

    /// Each cut as the sorted list of its members and its weight.
    pub fn cuts(&self) -> &[(Vec<usize>, f64)] {
        &self.cuts
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    /// `sum_E w_E |1_E(i) - 1_E(j)|`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.cuts
            .iter()
            .filter(|(e, _)| e.binary_search(&i).is_ok() != e.binary_search(&j).is_ok())
            .map(|(_, w)| w)
            .sum()
    }
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("need at least two points".into()));
    }
    let d = points[0].len();
    if d == 0 {
        return Err(Error::InvalidArgument(
            "points must have at least one coordinate".into(),
        ));
    }
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: p.len(),
        });
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("points have a non-finite coordinate".into()));
    }
    Ok(d)
}

/// Threshold cuts along each coordinate: between consecutive distinct
/// values `v < v'` the cut separating `{i : x_i > v}` from the rest gets
/// weight `v' - v`. Each cut is stored as the side not containing point 0,
/// and cuts with the same side are merged.
pub fn cut_decompose(points: &[Vec<f64>]) -> Result<CutDecomposition> {
    let d = check_points(points)?;
    let n = points.len();
    let mut cuts: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    for c in 0..d {
        let mut values: Vec<f64> = points.iter().map(|p| p[c]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let above = points[0][c] > lo;
            let members: Vec<usize> = (0..n).filter(|&i| (points[i][c] > lo) != above).collect();
            match index.get(&members) {
                Some(&k) => cuts[k].1 += hi - lo,
                None => {
                    index.insert(members.clone(), cuts.len());
                    cuts.push((members, hi - lo));
                }
            }
        }
    }
    Ok(CutDecomposition { n, cuts })
}

/// Points in `R^k` compared under the `l_p` norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddedPoints {
    pub k: usize,
    pub p: f64,
    pub points: Vec<Vec<f64>>,
}

/// Output of [`embed_l1`].
#[derive(Debug, Clone, Serialize)]
pub struct L1Embedding {
    pub embedded: EmbeddedPoints,
    pub eps0: f64,
    pub cut_count: usize,
    pub support_bound: usize,
    /// Extremes of `|z_i - z_j|_1 / |x_i - x_j|_1` over pairs at positive
    /// distance.
    pub min_distortion: f64,
    pub max_distortion: f64,
}

/// Embeds `n` points of `l_1^d` into `l_1^k` with `k <= ceil(n / eps0^2)`
/// and every pairwise distance stretched by a factor in `[1, 1 + eps]`.
pub fn embed_l1(points: &[Vec<f64>], eps: f64) -> Result<L1Embedding> {
    check_eps(eps)?;
    let cuts = cut_decompose(points)?;
    let n = points.len();
    let eps0 = eps_for_ratio(1.0 + eps)?;
    let support_bound = iteration_count(n, eps0);

    let columns: Vec<Vec<f64>> = if cuts.is_empty() {
        Vec::new()
    } else {
        let frame = Frame::new(
            n,
            cuts.cuts
                .iter()
                .map(|(e, w)| {
                    let mut x = vec![0.0; n];
                    let s = w.sqrt();
                    e.iter().for_each(|&i| x[i] = s);
                    x
                })
                .collect(),
        )?;
        let s = BssSparsifier::new(eps0)?
            .keep_trace(false)
            .run(&frame)?
            .unit_floor_weights();
        s.iter()
            .map(|(e, se)| {
                let (members, w) = &cuts.cuts[e];
                let mut col = vec![0.0; n];
                members.iter().for_each(|&i| col[i] = se * w);
                col
            })
            .collect()
    };
    let k = columns.len();
    let z: Vec<Vec<f64>> = (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        for j in (i + 1)..n {
            let orig = l1_distance(&points[i], &points[j]);
            let emb = l1_distance(&z[i], &z[j]);
            if orig > 0.0 {
                let r = emb / orig;
                lo = lo.min(r);
                hi = hi.max(r);
            } else if emb != 0.0 {
                return Err(Error::Certification(format!(
                    "coincident points {i} and {j} were separated by {emb}"
                )));
            }
        }
    }
    if !lo.is_finite() {
        (lo, hi) = (1.0, 1.0);
    }
    if lo < 1.0 - 1e-8 || hi > 1.0 + eps + 1e-8 {
        return Err(Error::Certification(format!(
            "pairwise distortion range [{lo}, {hi}] outside [1, {}]",
            1.0 + eps
        )));
    }
    Ok(L1Embedding {
        embedded: EmbeddedPoints { k, p: 1.0, points: z },
        eps0,
        cut_count: cuts.len(),
        support_bound,
        min_distortion: lo,
        max_distortion: hi,
    })
}
