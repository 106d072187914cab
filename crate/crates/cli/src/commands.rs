use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use rforge_core::bss::{theta, BssSparsifier, SparseWeights};
use rforge_core::embed::{approximate_john, embed_l1 as l1_embed, embed_lp_even};
use rforge_core::generate::seeded_rng;
use rforge_core::graph::{sparsify_graph_with_report, spectral_gap_ratio, verify_quality, WeightedGraph};
use rforge_core::io;
use rforge_core::lab::{cycle_counterexample, cycle_quality_bound, quality_lower_bound, ProbeSet, QualityBound};
use rforge_core::linalg::{Frame, Matrix};
use rforge_core::ri::ri_select as select;
use rforge_core::{Error, Result};

use crate::{
    CycleDemoArgs, EmbedL1Args, EmbedLpArgs, JohnApproxArgs, RiSelectArgs, SparsifyFrameArgs, SparsifyGraphArgs,
    VerifyArgs,
};

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Validation(format!("report serialization: {e}")))
}

fn read_graph(path: &Path) -> Result<WeightedGraph> {
    io::read_edge_list(io::open(path)?)
}

fn read_matrix(path: &Path) -> Result<Matrix> {
    io::read_matrix(io::open(path)?)
}

fn cert_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".cert.json");
    PathBuf::from(s)
}

fn write_weights_with_cert<T: Serialize>(out: &Path, weights: &SparseWeights, cert: &T) -> Result<()> {
    io::write_weights(weights, io::create(out)?)?;
    let mut text = serde_json::to_string_pretty(cert).map_err(|e| Error::Validation(e.to_string()))?;
    text.push('\n');
    io::create(&cert_path(out))?.write_all(text.as_bytes())?;
    Ok(())
}

fn window_check(lo: f64, hi: f64, floor: f64, ceiling: f64) -> Result<()> {
    if lo < floor - 1e-8 || hi > ceiling + 1e-8 {
        return Err(Error::Certification(format!(
            "measured range [{lo}, {hi}] outside [{floor}, {ceiling}]"
        )));
    }
    Ok(())
}

pub fn sparsify_graph(a: &SparsifyGraphArgs) -> Result<Value> {
    let g = read_graph(&a.input)?;
    let (h, report) = sparsify_graph_with_report(&g, a.eps)?;
    if let Some(out) = &a.output {
        io::write_edge_list(&h, io::create(out)?)?;
    }
    #[derive(Serialize)]
    struct Out {
        #[serde(flatten)]
        report: rforge_core::graph::GraphSparsifyReport,
        gap: Option<rforge_core::graph::GapDiagnostic>,
    }
    to_value(&Out {
        report,
        gap: spectral_gap_ratio(&h).ok(),
    })
}

pub fn sparsify_frame(a: &SparsifyFrameArgs) -> Result<Value> {
    let m = read_matrix(&a.input)?;
    let frame = Frame::from_rows(&m)?;
    let out = BssSparsifier::new(a.eps)?.keep_trace(false).run(&frame)?;
    if let Some(path) = &a.output {
        write_weights_with_cert(path, &out.weights, &out)?;
    }
    #[derive(Serialize)]
    struct Out {
        vectors: usize,
        dim: usize,
        reduced_dim: usize,
        eps: f64,
        theta: f64,
        iterations: usize,
        support: usize,
        support_bound: usize,
        gamma: f64,
        certified_min: f64,
        certified_max: f64,
        floor: f64,
        ceiling: f64,
    }
    to_value(&Out {
        vectors: frame.len(),
        dim: frame.ambient_dim(),
        reduced_dim: out.reduced_dim,
        eps: a.eps,
        theta: out.theta,
        iterations: out.iterations,
        support: out.weights.support(),
        support_bound: out.support_bound(),
        gamma: out.gamma,
        certified_min: out.certified_min,
        certified_max: out.certified_max,
        floor: (1.0 - a.eps).powi(2),
        ceiling: (1.0 + a.eps).powi(2),
    })
}

pub fn ri_select(a: &RiSelectArgs) -> Result<Value> {
    let t = read_matrix(&a.input)?;
    let frame = match &a.frame {
        Some(path) => Frame::from_rows(&read_matrix(path)?)?,
        None => Frame::standard_basis(t.cols())?,
    };
    let out = select(&frame, &t, a.eps)?;
    if let Some(path) = &a.output {
        let mut w = io::create(path)?;
        for i in &out.sigma {
            writeln!(w, "{i}")?;
        }
        w.flush()?;
    }
    #[derive(Serialize)]
    struct Out<'a> {
        t_rows: usize,
        t_cols: usize,
        frame_size: usize,
        #[serde(flatten)]
        outcome: &'a rforge_core::ri::RiOutcome,
    }
    to_value(&Out {
        t_rows: t.rows(),
        t_cols: t.cols(),
        frame_size: frame.len(),
        outcome: &out,
    })
}

pub fn embed_l1(a: &EmbedL1Args) -> Result<Value> {
    let m = read_matrix(&a.input)?;
    let out = l1_embed(&m.row_vectors(), a.eps)?;
    let k = out.embedded.k;
    if let Some(path) = &a.output {
        let z = Matrix::from_vec(m.rows(), k, out.embedded.points.concat())?;
        io::write_matrix(&z, io::create(path)?)?;
    }
    #[derive(Serialize)]
    struct Out {
        points: usize,
        dim: usize,
        eps: f64,
        eps0: f64,
        cut_count: usize,
        target_dim: usize,
        support_bound: usize,
        min_distortion: f64,
        max_distortion: f64,
    }
    to_value(&Out {
        points: m.rows(),
        dim: m.cols(),
        eps: a.eps,
        eps0: out.eps0,
        cut_count: out.cut_count,
        target_dim: k,
        support_bound: out.support_bound,
        min_distortion: out.min_distortion,
        max_distortion: out.max_distortion,
    })
}

pub fn embed_lp(a: &EmbedLpArgs, seed: u64) -> Result<Value> {
    let m = read_matrix(&a.input)?;
    let basis: Vec<Vec<f64>> = (0..m.cols()).map(|j| m.column(j)).collect();
    let out = embed_lp_even(&basis, a.p, a.eps)?;
    let (lo, hi) = out.sampled_distortion(&basis, a.samples, &mut seeded_rng(seed));
    let norm_ceiling = out.ratio_bound.powf(1.0 / a.p as f64);
    if a.samples > 0 {
        window_check(lo, hi, 1.0, norm_ceiling)?;
    }
    if let Some(path) = &a.output {
        let weights = SparseWeights::new(
            out.selected.iter().copied().zip(out.weights.iter().copied()).collect(),
            m.rows(),
        )?;
        write_weights_with_cert(path, &weights, &out)?;
    }
    #[derive(Serialize)]
    struct Out<'a> {
        ambient_dim: usize,
        subspace_dim: usize,
        eps: f64,
        #[serde(flatten)]
        embedding: &'a rforge_core::embed::LpEmbedding,
        samples: usize,
        sampled_min_distortion: Option<f64>,
        sampled_max_distortion: Option<f64>,
        distortion_ceiling: f64,
    }
    let sampled = a.samples > 0 && lo.is_finite();
    to_value(&Out {
        ambient_dim: m.rows(),
        subspace_dim: m.cols(),
        eps: a.eps,
        embedding: &out,
        samples: a.samples,
        sampled_min_distortion: sampled.then_some(lo),
        sampled_max_distortion: sampled.then_some(hi),
        distortion_ceiling: norm_ceiling,
    })
}

pub fn john_approx(a: &JohnApproxArgs) -> Result<Value> {
    let jd = io::read_john(io::open(&a.input)?)?;
    let out = approximate_john(&jd, a.eps)?;
    if let Some(path) = &a.output {
        io::write_john(&out.decomposition, io::create(path)?)?;
    }
    let center = out
        .decomposition
        .center_of_mass()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    #[derive(Serialize)]
    struct Out {
        dim: usize,
        input_points: usize,
        eps: f64,
        eps0: f64,
        support: usize,
        support_bound: usize,
        output_points: usize,
        operator_deviation: f64,
        identity_residual: f64,
        center_of_mass: f64,
    }
    to_value(&Out {
        dim: jd.dim(),
        input_points: jd.len(),
        eps: a.eps,
        eps0: out.eps0,
        support: out.support,
        support_bound: out.support_bound,
        output_points: out.decomposition.len(),
        operator_deviation: out.operator_deviation,
        identity_residual: out.identity_residual,
        center_of_mass: center,
    })
}

pub fn verify(a: &VerifyArgs, seed: u64) -> Result<Value> {
    let g = read_graph(&a.g)?;
    let h = read_graph(&a.h)?;
    let ceiling = a.eps.map(|e| theta(e).powi(2));
    if a.p == 2.0 && a.probes.is_none() {
        let q = verify_quality(&g, &h)?;
        if let Some(c) = ceiling {
            window_check(q.min_quotient, q.max_quotient, 1.0, c)?;
        }
        #[derive(Serialize)]
        struct Out {
            vertices: usize,
            g_edges: usize,
            h_edges: usize,
            p: f64,
            #[serde(flatten)]
            quality: rforge_core::graph::QualityReport,
            ratio: f64,
            ceiling: Option<f64>,
        }
        return to_value(&Out {
            vertices: g.vertex_count(),
            g_edges: g.edge_count(),
            h_edges: h.edge_count(),
            p: a.p,
            ratio: q.ratio(),
            quality: q,
            ceiling,
        });
    }
    let probes = match &a.probes {
        Some(path) => ProbeSet::new(&g, read_matrix(path)?.row_vectors())?,
        None => ProbeSet::with_random(&g, Vec::new(), a.probe_count, seed)?,
    };
    let bound = quality_lower_bound(&g, &h, a.p, &probes)?;
    if let Some(c) = ceiling {
        if bound.quality > c + 1e-8 {
            return Err(Error::Certification(format!(
                "probe quality {} exceeds the claimed {c}",
                bound.quality
            )));
        }
    }
    #[derive(Serialize)]
    struct Out {
        vertices: usize,
        g_edges: usize,
        h_edges: usize,
        probe_count: usize,
        #[serde(flatten)]
        bound: QualityBound,
        ceiling: Option<f64>,
        scaling_range: Option<(f64, f64)>,
    }
    to_value(&Out {
        vertices: g.vertex_count(),
        g_edges: g.edge_count(),
        h_edges: h.edge_count(),
        probe_count: probes.len(),
        bound,
        ceiling,
        scaling_range: ceiling.and_then(|c| bound.scaling_range(c)),
    })
}

pub fn cycle_demo(a: &CycleDemoArgs, seed: u64) -> Result<Value> {
    let inst = cycle_counterexample(a.n, a.p, a.eps)?;
    let probes = ProbeSet::with_random(&inst.g, inst.witnesses.probes().to_vec(), a.probe_count, seed)?;
    let p_quality = quality_lower_bound(&inst.g, &inst.h, a.p, &probes)?;
    let q_witness = quality_lower_bound(&inst.g, &inst.h, a.q, &inst.witnesses)?;
    let q_probes = quality_lower_bound(&inst.g, &inst.h, a.q, &probes)?;
    let analytic = cycle_quality_bound(a.n, a.p, a.q, a.eps);
    let p_claim = 1.0 + a.eps;

    if a.p >= 1.0 && p_quality.quality > p_claim + 1e-9 {
        return Err(Error::Certification(format!(
            "p-quality {} exceeds 1 + eps = {p_claim}",
            p_quality.quality
        )));
    }
    if a.q > a.p && q_witness.quality < analytic {
        return Err(Error::Certification(format!(
            "witness q-quality {} is below eps (n-1)^(q-p) = {analytic}",
            q_witness.quality
        )));
    }
    #[derive(Serialize)]
    struct Out {
        n: usize,
        p: f64,
        q: f64,
        eps: f64,
        g_edges: usize,
        h_edges: usize,
        probe_count: usize,
        p_quality: f64,
        p_quality_claim: f64,
        p_ratios: QualityBound,
        q_quality_lower_bound: f64,
        q_quality_analytic: f64,
        q_quality_probes: f64,
    }
    to_value(&Out {
        n: a.n,
        p: a.p,
        q: a.q,
        eps: a.eps,
        g_edges: inst.g.edge_count(),
        h_edges: inst.h.edge_count(),
        probe_count: probes.len(),
        p_quality: p_quality.quality,
        p_quality_claim: p_claim,
        p_ratios: p_quality,
        q_quality_lower_bound: q_witness.quality,
        q_quality_analytic: analytic,
        q_quality_probes: q_probes.quality,
    })
}
