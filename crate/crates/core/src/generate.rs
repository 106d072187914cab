//! Seeded random instances for tests, benchmarks, and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::embed::JohnDecomposition;
use crate::error::Result;
use crate::graph::WeightedGraph;
use crate::linalg::{eigh, norm_sq, Frame, Matrix};

/// The generator behind every seeded run.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal_vec<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

/// Each pair becomes an edge with probability `density`, weighted
/// uniformly in `[0.5, 2)`.
pub fn random_graph<R: Rng + ?Sized>(n: usize, density: f64, rng: &mut R) -> Result<WeightedGraph> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < density {
                edges.push((i, j, rng.random_range(0.5..2.0)));
            }
        }
    }
    WeightedGraph::new(n, edges)
}

pub fn random_points<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n).map(|_| normal_vec(d, rng)).collect()
}

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// `m` Gaussian vectors in `R^n` (generically a full-rank frame).
pub fn random_frame<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Frame> {
    Frame::new(n, random_points(m, n, rng))
}

/// A symmetric John decomposition with `pairs` antipodal pairs: Gaussian
/// vectors `+-u_i` are whitened by `S^{-1/2}` with `S = 2 sum u_i u_i^T`,
/// then normalized, with `c_i` the squared whitened length.
pub fn random_john_decomposition<R: Rng + ?Sized>(n: usize, pairs: usize, rng: &mut R) -> Result<JohnDecomposition> {
    let raw = Frame::new(n, random_points(pairs, n, rng))?;
    let s = raw.frame_operator().scaled(2.0);
    let inv_sqrt = eigh(&s)?.spectral_map(|l| 1.0 / l.sqrt());
    let mut points = Vec::with_capacity(2 * pairs);
    let mut weights = Vec::with_capacity(2 * pairs);
    for u in raw.vectors() {
        let x = inv_sqrt.matvec(u);
        let c = norm_sq(&x);
        let len = c.sqrt();
        let unit: Vec<f64> = x.iter().map(|v| v / len).collect();
        points.push(unit.iter().map(|v| -v).collect());
        points.push(unit);
        weights.push(c);
        weights.push(c);
    }
    JohnDecomposition::new(n, points, weights)
}
