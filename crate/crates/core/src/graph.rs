//! Weighted graphs, Laplacians, and spectral graph sparsification.

use std::collections::BTreeMap;

use log::warn;
use serde::Serialize;

use crate::bss::{check_eps, iteration_count, theta, BssSparsifier};
use crate::error::{Error, Result};
use crate::linalg::{eigh, generalized_eigh, norm_sq, Frame, Matrix, SymmetricMatrix};

/// Relative threshold below which a Laplacian eigenvalue counts as kernel.
pub const KERNEL_RTOL: f64 = 1e-9;

/// An undirected graph with positive edge weights, stored as `(i, j, w)`
/// with `i < j` and at most one entry per pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    /// Strict constructor: every edge must already satisfy `i < j < n`,
    /// `w > 0` finite, and appear once.
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for &(i, j, w) in &edges {
            if !(i < j && j < n) {
                return Err(Error::InvalidArgument(format!(
                    "edge ({i}, {j}) must satisfy i < j < n = {n}"
                )));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidArgument(format!("edge ({i}, {j}) has weight {w}")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidArgument(format!("edge ({i}, {j}) appears twice")));
            }
        }
        Ok(Self { n, edges })
    }

    /// Lenient constructor: orients each pair as `i < j`, drops self-loops
    /// with a warning and zero weights silently. Duplicate pairs and
    /// negative or non-finite weights are still errors.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut out = Vec::new();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidArgument(format!("edge ({a}, {b}) outside 0..{n}")));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidArgument(format!("edge ({a}, {b}) has weight {w}")));
            }
            if a == b {
                warn!("ignoring self-loop at vertex {a}");
                continue;
            }
            if w == 0.0 {
                continue;
            }
            out.push((a.min(b), a.max(b), w));
        }
        Self::new(n, out)
    }

    pub fn empty(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    /// `K_n` with every edge weighted `w`.
    pub fn complete(n: usize, w: f64) -> Result<Self> {
        let edges = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j, w))).collect();
        Self::new(n, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of nonzero off-diagonal entries of the symmetric weight
    /// matrix, i.e. twice the edge count.
    pub fn ordered_support(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (i.min(j), i.max(j));
        self.edges
            .iter()
            .find(|&&(x, y, _)| x == a && y == b)
            .map_or(0.0, |e| e.2)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.n, self.edges.iter().map(|&(i, j, w)| (i, j, w * factor)).collect())
    }

    /// The symmetric weighted adjacency matrix.
    pub fn adjacency(&self) -> SymmetricMatrix {
        let mut a = SymmetricMatrix::zeros(self.n);
        for &(i, j, w) in &self.edges {
            a.add_to(i, j, w);
        }
        a
    }

    fn edge_map(&self) -> BTreeMap<(usize, usize), f64> {
        self.edges.iter().map(|&(i, j, w)| ((i, j), w)).collect()
    }
}

/// `D - G` for a weighted graph `G` with degree matrix `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    matrix: SymmetricMatrix,
}

impl Laplacian {
    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.matrix
    }

    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    /// `<L y, y> = sum over edges of w (y_i - y_j)^2`.
    pub fn quadratic_form(&self, y: &[f64]) -> f64 {
        self.matrix.quadratic_form(y)
    }
}

pub fn laplacian(g: &WeightedGraph) -> Laplacian {
    let mut m = SymmetricMatrix::zeros(g.n);
    for &(i, j, w) in &g.edges {
        m.add_to(i, i, w);
        m.add_to(j, j, w);
        m.add_to(i, j, -w);
    }
    Laplacian { matrix: m }
}

/// One vector `sqrt(w) (e_i - e_j)` per edge, in edge order. The frame
/// operator is the Laplacian.
pub fn edge_frame(g: &WeightedGraph) -> Result<Frame> {
    let vectors = g
        .edges
        .iter()
        .map(|&(i, j, w)| {
            let mut v = vec![0.0; g.n];
            let s = w.sqrt();
            v[i] = s;
            v[j] = -s;
            v
        })
        .collect();
    Frame::new(g.n.max(1), vectors)
}

/// Diagnostics from [`sparsify_graph_with_report`].
#[derive(Debug, Clone, Serialize)]
pub struct GraphSparsifyReport {
    pub vertices: usize,
    pub input_edges: usize,
    pub output_edges: usize,
    pub ordered_support: usize,
    pub support_bound: usize,
    pub eps: f64,
    pub theta: f64,
    pub iterations: usize,
    pub range_dim: usize,
    /// Certified bounds of `<L_H y, y> / <L_G y, y>` on the range of `L_G`.
    pub quality: QualityReport,
}

/// Sparsifies `g` so that `L_G <= L_H <= theta^2 L_G` with
/// `theta = (1 + eps) / (1 - eps)` and at most `ceil(n / eps^2)` edges.
pub fn sparsify_graph(g: &WeightedGraph, eps: f64) -> Result<WeightedGraph> {
    sparsify_graph_with_report(g, eps).map(|(h, _)| h)
}

pub fn sparsify_graph_with_report(g: &WeightedGraph, eps: f64) -> Result<(WeightedGraph, GraphSparsifyReport)> {
    check_eps(eps)?;
    let th = theta(eps);
    let bound = 2 * iteration_count(g.n, eps);
    let (h, iterations, range_dim) = if g.edges.is_empty() {
        (WeightedGraph::empty(g.n), 0, 0)
    } else {
        let frame = edge_frame(g)?;
        let out = BssSparsifier::new(eps)?.keep_trace(false).run(&frame)?;
        let unit = out.unit_floor_weights();
        let edges = unit
            .iter()
            .map(|(e, s)| {
                let (i, j, w) = g.edges[e];
                (i, j, s * w)
            })
            .collect();
        (WeightedGraph::new(g.n, edges)?, out.iterations, out.reduced_dim)
    };
    if h.ordered_support() > bound {
        return Err(Error::Certification(format!(
            "ordered support {} exceeds 2 ceil(n / eps^2) = {bound}",
            h.ordered_support()
        )));
    }
    let quality = verify_quality(g, &h)?;
    if quality.min_quotient < 1.0 - 1e-8 || quality.max_quotient > th * th + 1e-8 {
        return Err(Error::Certification(format!(
            "quotient range [{}, {}] outside [1, {}]",
            quality.min_quotient,
            quality.max_quotient,
            th * th
        )));
    }
    let report = GraphSparsifyReport {
        vertices: g.n,
        input_edges: g.edge_count(),
        output_edges: h.edge_count(),
        ordered_support: h.ordered_support(),
        support_bound: bound,
        eps,
        theta: th,
        iterations,
        range_dim,
        quality,
    };
    Ok((h, report))
}

/// Extreme generalized Rayleigh quotients of `(L_H, L_G)` on the
/// orthogonal complement of `ker L_G`.
#[derive(Debug, Clone, Serialize)]
pub struct QualityReport {
    pub min_quotient: f64,
    pub max_quotient: f64,
    pub kernel_dim: usize,
    pub range_dim: usize,
    pub g_support: usize,
    pub h_support: usize,
}

impl QualityReport {
    pub fn ratio(&self) -> f64 {
        self.max_quotient / self.min_quotient
    }
}

/// Certifies `h` against `g` with a dense generalized eigensolve.
///
/// Fails with [`Error::Certification`] naming an offending edge if `h` uses
/// an edge absent from `g`, or an offending kernel vector if `L_H` does not
/// vanish on `ker L_G`.
pub fn verify_quality(g: &WeightedGraph, h: &WeightedGraph) -> Result<QualityReport> {
    if g.n != h.n {
        return Err(Error::DimensionMismatch {
            expected: g.n,
            got: h.n,
        });
    }
    let g_edges = g.edge_map();
    if let Some(&(i, j, w)) = h.edges.iter().find(|&&(i, j, _)| !g_edges.contains_key(&(i, j))) {
        return Err(Error::Certification(format!(
            "edge ({i}, {j}) with weight {w} is not an edge of the input graph"
        )));
    }

    let lg = laplacian(g);
    let lh = laplacian(h);
    let n = g.n;
    let ed = eigh(lg.matrix())?;
    let top = if n == 0 { 0.0 } else { ed.lambda_max() };
    let range_dim = ed.values.iter().take_while(|&&l| l > KERNEL_RTOL * top).count();

    let scale = 1.0 + lh.matrix().max_abs() * n as f64;
    for k in range_dim..n {
        let v = ed.vector(k);
        let r = norm_sq(&lh.matrix().matvec(&v)).sqrt();
        if r > 1e-8 * scale {
            return Err(Error::Certification(format!(
                "sparsifier Laplacian does not vanish on kernel vector {v:?} (residual {r:e})"
            )));
        }
    }

    let (min_quotient, max_quotient) = if range_dim == 0 {
        (1.0, 1.0)
    } else {
        let q = Matrix::from_fn(n, range_dim, |i, j| ed.vectors[(i, j)]);
        let gen = generalized_eigh(&lh.matrix().congruence(&q)?, &lg.matrix().congruence(&q)?)?;
        (gen.lambda_min(), gen.lambda_max())
    };
    Ok(QualityReport {
        min_quotient,
        max_quotient,
        kernel_dim: n - range_dim,
        range_dim,
        g_support: g.ordered_support(),
        h_support: h.ordered_support(),
    })
}

/// Adjacency-spectrum diagnostic for a sparsifier, with the
/// Ramanujan-graph value at the same average degree for comparison.
#[derive(Debug, Clone, Serialize)]
pub struct GapDiagnostic {
    /// `(lambda_1 - lambda_n) / (lambda_1 - lambda_2)`.
    pub ratio: f64,
    pub lambda_1: f64,
    pub lambda_2: f64,
    pub lambda_n: f64,
    /// Average unweighted degree `2 |E| / n`.
    pub average_degree: f64,
    /// `(d + 2 sqrt(d - 1)) / (d - 2 sqrt(d - 1))`, the ratio a
    /// `d`-regular Ramanujan graph attains; absent for `d <= 2`.
    pub ramanujan_ratio: Option<f64>,
}

pub fn spectral_gap_ratio(h: &WeightedGraph) -> Result<GapDiagnostic> {
    if h.n < 2 {
        return Err(Error::InvalidArgument(
            "spectral gap needs at least two vertices".into(),
        ));
    }
    let values = eigh(&h.adjacency())?.values;
    let (l1, l2, ln) = (values[0], values[1], values[h.n - 1]);
    if l1 - l2 <= 1e-12 * l1.abs().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "degenerate adjacency spectrum (lambda_1 = {l1}, lambda_2 = {l2}): graph is disconnected or trivial"
        )));
    }
    let d = 2.0 * h.edge_count() as f64 / h.n as f64;
    let ramanujan_ratio = if d > 2.0 {
        let r = 2.0 * (d - 1.0).sqrt();
        Some((d + r) / (d - r))
    } else {
        None
    };
    Ok(GapDiagnostic {
        ratio: (l1 - ln) / (l1 - l2),
        lambda_1: l1,
        lambda_2: l2,
        lambda_n: ln,
        average_degree: d,
        ramanujan_ratio,
    })
}
