//! Power-`p` energies of graphs and probe-based quality estimates for
//! `p`-sparsifiers.
//!
//! `H` is a `p`-sparsifier of `G` with quality `C` if for some `lambda > 0`
//! and all `x` in `R^n`
//!
//! ```text
//! lambda E_G(x) <= E_H(x) <= C lambda E_G(x),   E(x) = sum_ij w_ij |x_i - x_j|^p.
//! ```
//!
//! Over a finite probe set the best such `C` is `max R / min R` with
//! `R = E_H / E_G`, which bounds the true quality from below.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Seed of the default random probes.
pub const DEFAULT_PROBE_SEED: u64 = 0x5EED;
/// Number of default random probes.
pub const DEFAULT_PROBE_COUNT: usize = 500;

/// `sum_i sum_j w_ij |x_i - x_j|^p`, each edge counted in both orders.
pub fn p_energy(g: &WeightedGraph, x: &[f64], p: f64) -> f64 {
    2.0 * g
        .edges()
        .iter()
        .map(|&(i, j, w)| w * (x[i] - x[j]).abs().powf(p))
        .sum::<f64>()
}

/// Point configurations on the line, each with positive energy for the
/// graph it was built against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSet {
    probes: Vec<Vec<f64>>,
}

impl ProbeSet {
    /// Keeps the probes that separate the endpoints of at least one edge of
    /// `g`; fails if none remain.
    pub fn new(g: &WeightedGraph, probes: Vec<Vec<f64>>) -> Result<Self> {
        let n = g.vertex_count();
        if let Some(p) = probes.iter().find(|p| p.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.len(),
            });
        }
        let probes: Vec<Vec<f64>> = probes
            .into_iter()
            .filter(|x| x.iter().all(|v| v.is_finite()))
            .filter(|x| g.edges().iter().any(|&(i, j, _)| x[i] != x[j]))
            .collect();
        if probes.is_empty() {
            return Err(Error::InvalidArgument(
                "no probe has positive energy on the graph".into(),
            ));
        }
        Ok(Self { probes })
    }

    /// `extra` followed by `count` standard normal configurations drawn from
    /// a ChaCha8 stream seeded with `seed`.
    pub fn with_random(g: &WeightedGraph, extra: Vec<Vec<f64>>, count: usize, seed: u64) -> Result<Self> {
        let n = g.vertex_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut probes = extra;
        for _ in 0..count {
            probes.push((0..n).map(|_| StandardNormal.sample(&mut rng)).collect());
        }
        Self::new(g, probes)
    }

    pub fn probes(&self) -> &[Vec<f64>] {
        &self.probes
    }

    pub fn len(&self) -> usize {
        self.probes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probes.is_empty()
    }
}

/// Probe-based lower bound on the `p`-quality of `h` against `g`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QualityBound {
    pub p: f64,
    /// `max R / min R`.
    pub quality: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl QualityBound {
    /// Scalings `lambda` that realize a claimed quality `c` on the probes:
    /// `[max R / c, min R]`, or `None` when `c` is below the bound.
    pub fn scaling_range(&self, c: f64) -> Option<(f64, f64)> {
        let lo = self.max_ratio / c;
        (lo <= self.min_ratio).then_some((lo, self.min_ratio))
    }
}

pub fn quality_lower_bound(g: &WeightedGraph, h: &WeightedGraph, p: f64, probes: &ProbeSet) -> Result<QualityBound> {
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!("exponent p = {p} must be positive")));
    }
    if g.vertex_count() != h.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: g.vertex_count(),
            got: h.vertex_count(),
        });
    }
    if let Some(&(i, j, _)) = h.edges().iter().find(|&&(i, j, _)| g.weight(i, j) == 0.0) {
        return Err(Error::InvalidArgument(format!(
            "edge ({i}, {j}) is not an edge of the reference graph"
        )));
    }
    let ratios: Vec<f64> = probes
        .probes
        .par_iter()
        .map(|x| p_energy(h, x, p) / p_energy(g, x, p))
        .collect();
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(QualityBound {
        p,
        quality: max_ratio / min_ratio,
        min_ratio,
        max_ratio,
    })
}

/// A weighted cycle and the same cycle with its light edge removed.
#[derive(Debug, Clone, Serialize)]
pub struct CycleInstance {
    pub g: WeightedGraph,
    pub h: WeightedGraph,
    /// `x_i = i` and the indicator of vertex 1.
    pub witnesses: ProbeSet,
    pub n: usize,
    pub p: f64,
    pub eps: f64,
}

/// Cycle on `0..n` where edge `{0, n-1}` has weight 1 and every path edge
/// `{i, i+1}` has weight `(n-1)^(p-1) / eps`; `h` drops the light edge.
///
/// For `p >= 1`, `h` is a `p`-sparsifier of `g` with quality `1 + eps`,
/// while at any `q > p` the witnesses force quality at least
/// `eps (n-1)^(q-p)`.
pub fn cycle_counterexample(n: usize, p: f64, eps: f64) -> Result<CycleInstance> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("cycle needs n >= 3, got {n}")));
    }
    if !(p > 0.0) || !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need p > 0 and eps > 0, got p = {p}, eps = {eps}"
        )));
    }
    let heavy = ((n - 1) as f64).powf(p - 1.0) / eps;
    let path: Vec<(usize, usize, f64)> = (0..n - 1).map(|i| (i, i + 1, heavy)).collect();
    let mut cycle = path.clone();
    cycle.push((0, n - 1, 1.0));
    let g = WeightedGraph::new(n, cycle)?;
    let h = WeightedGraph::new(n, path)?;
    let line: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let mut bump = vec![0.0; n];
    bump[1] = 1.0;
    let witnesses = ProbeSet::new(&g, vec![line, bump])?;
    Ok(CycleInstance {
        g,
        h,
        witnesses,
        n,
        p,
        eps,
    })
}

/// `eps (n-1)^(q-p)`.
pub fn cycle_quality_bound(n: usize, p: f64, q: f64, eps: f64) -> f64 {
    eps * ((n - 1) as f64).powf(q - p)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonotonicityReport {
    pub p: f64,
    pub q: f64,
    pub claimed_quality: f64,
    pub bound: QualityBound,
}

/// Checks that a `p`-sparsifier of quality `c` shows probe quality at most
/// `c` at an exponent `q <= p`.
pub fn monotonicity_check(
    g: &WeightedGraph,
    h: &WeightedGraph,
    p: f64,
    q: f64,
    c: f64,
    probes: &ProbeSet,
) -> Result<MonotonicityReport> {
    if !(q > 0.0 && q <= p) {
        return Err(Error::InvalidArgument(format!("need 0 < q <= p, got q = {q}, p = {p}")));
    }
    let bound = quality_lower_bound(g, h, q, probes)?;
    if bound.quality > c + 1e-8 {
        return Err(Error::Certification(format!(
            "quality {} at q = {q} exceeds the claimed {c} at p = {p}",
            bound.quality
        )));
    }
    Ok(MonotonicityReport {
        p,
        q,
        claimed_quality: c,
        bound,
    })
}
