//! Deterministic barrier-potential sparsification of isotropic frames.
//!
//! Given `x_1, ..., x_m` with `sum x_i x_i^T = I_n`, the iteration builds
//! `A_i = A_{i-1} + t_i x_j x_j^T` while keeping the spectrum of `A_i`
//! strictly inside the moving window `(l_i, u_i)` with
//! `l_i = -n/eps + i` and `u_i = theta (n/eps + i)`, `theta = (1+eps)/(1-eps)`.
//! The window is policed by the potentials
//!
//! ```text
//! upper(A, u) = sum_j 1 / (u - lambda_j(A))
//! lower(A, l) = sum_j 1 / (lambda_j(A) - l)
//! ```
//!
//! The upper potential is held exactly at `eps / theta` and the lower one
//! never increases. After `k = ceil(n / eps^2)` steps the condition number
//! of `A_k` is at most `theta^2`, and at most `k` distinct vectors carry
//! weight.
//!
//! Every step re-checks these facts and fails with
//! [`Error::InvariantViolation`] instead of returning a weaker result.

use std::collections::BTreeMap;

use log::debug;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    default_rank_tol, eigh, isotropic_reduce, trace_after_rank_one, BarrierSide, EigenDecomposition, Frame, Resolvent,
    SymmetricMatrix,
};

/// Slack on `beta_j >= alpha_j` when picking a candidate, and on the
/// summed version of the same inequality.
pub const FEASIBILITY_SLACK: f64 = 1e-9;
/// Relative tolerance for upper-potential conservation.
pub const UPPER_POTENTIAL_RTOL: f64 = 1e-8;
/// Absolute slack on lower-potential monotonicity.
pub const LOWER_POTENTIAL_SLACK: f64 = 1e-9;
/// Absolute slack on the candidate-sum bounds and the final sandwich.
pub const CERTIFICATE_SLACK: f64 = 1e-8;

pub fn theta(eps: f64) -> f64 {
    (1.0 + eps) / (1.0 - eps)
}

/// Number of barrier steps, `ceil(n / eps^2)`.
pub fn iteration_count(n: usize, eps: f64) -> usize {
    (n as f64 / (eps * eps)).ceil() as usize
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("eps = {eps} must lie in (0, 1)")))
    }
}

/// Solves `((1 + e) / (1 - e))^2 = ratio` for `e`.
pub fn eps_for_ratio(ratio: f64) -> Result<f64> {
    if !(ratio > 1.0) || !ratio.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "target ratio {ratio} must be finite and greater than 1"
        )));
    }
    let r = ratio.sqrt();
    Ok((r - 1.0) / (r + 1.0))
}

/// Weights `s_i > 0` on a subset of the `m` input indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseWeights {
    weights: BTreeMap<usize, f64>,
    source_size: usize,
}

impl SparseWeights {
    pub fn new(weights: BTreeMap<usize, f64>, source_size: usize) -> Result<Self> {
        for (&i, &w) in &weights {
            if i >= source_size {
                return Err(Error::InvalidArgument(format!(
                    "weight index {i} outside 0..{source_size}"
                )));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "weight {w} at index {i} must be positive"
                )));
            }
        }
        Ok(Self { weights, source_size })
    }

    pub fn support(&self) -> usize {
        self.weights.len()
    }

    pub fn source_size(&self) -> usize {
        self.source_size
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights.get(&i).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights.iter().map(|(&i, &w)| (i, w))
    }

    pub fn indices(&self) -> Vec<usize> {
        self.weights.keys().copied().collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            weights: self.weights.iter().map(|(&i, &w)| (i, w * factor)).collect(),
            source_size: self.source_size,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        (0..self.source_size).map(|i| self.get(i)).collect()
    }
}

/// Snapshot of the iteration after `step` barrier moves.
#[derive(Debug, Clone)]
pub struct BarrierState {
    step: usize,
    dim: usize,
    eps: f64,
    theta: f64,
    a: SymmetricMatrix,
    eig: EigenDecomposition,
    upper: f64,
    lower: f64,
    upper_potential: f64,
    lower_potential: f64,
}

impl BarrierState {
    /// `A_0 = 0` in dimension `dim`.
    pub fn initial(dim: usize, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Self::at_step(0, dim, eps, SymmetricMatrix::zeros(dim))
    }

    /// Rebuilds the state for a given `A_step`, computing its spectrum and
    /// both potentials.
    pub fn at_step(step: usize, dim: usize, eps: f64, a: SymmetricMatrix) -> Result<Self> {
        check_eps(eps)?;
        if a.order() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: a.order(),
            });
        }
        let th = theta(eps);
        let upper = upper_barrier(dim, eps, step);
        let lower = lower_barrier(dim, eps, step);
        let eig = eigh(&a)?;
        let upper_potential = eig.values.iter().map(|l| 1.0 / (upper - l)).sum();
        let lower_potential = eig.values.iter().map(|l| 1.0 / (l - lower)).sum();
        Ok(Self {
            step,
            dim,
            eps,
            theta: th,
            a,
            eig,
            upper,
            lower,
            upper_potential,
            lower_potential,
        })
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.a
    }

    pub fn spectrum(&self) -> &EigenDecomposition {
        &self.eig
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper_potential(&self) -> f64 {
        self.upper_potential
    }

    pub fn lower_potential(&self) -> f64 {
        self.lower_potential
    }

    pub fn next_upper(&self) -> f64 {
        upper_barrier(self.dim, self.eps, self.step + 1)
    }

    pub fn next_lower(&self) -> f64 {
        lower_barrier(self.dim, self.eps, self.step + 1)
    }
}

fn upper_barrier(n: usize, eps: f64, i: usize) -> f64 {
    theta(eps) * (n as f64 / eps + i as f64)
}

fn lower_barrier(n: usize, eps: f64, i: usize) -> f64 {
    -(n as f64) / eps + i as f64
}

/// Potential drops `(a, b)` caused by advancing both barriers one step
/// with `A_{i-1}` held fixed.
///
/// `a = upper(A, u_{i-1}) - upper(A, u_i)` and
/// `b = lower(A, l_i) - lower(A, l_{i-1})`, evaluated in the
/// cancellation-free product form.
pub fn barrier_gaps(state: &BarrierState) -> Result<(f64, f64)> {
    let (u_prev, u_next) = (state.upper, state.next_upper());
    let (l_prev, l_next) = (state.lower, state.next_lower());
    let step = state.step + 1;
    if state.eig.lambda_min() <= l_next {
        return Err(Error::invariant(
            step,
            format!(
                "lambda_min {} does not clear the next lower barrier {l_next}",
                state.eig.lambda_min()
            ),
        ));
    }
    let du = u_next - u_prev;
    let dl = l_next - l_prev;
    let a: f64 = state
        .eig
        .values
        .iter()
        .map(|&l| du / ((u_prev - l) * (u_next - l)))
        .sum();
    let b: f64 = state
        .eig
        .values
        .iter()
        .map(|&l| dl / ((l - l_next) * (l - l_prev)))
        .sum();
    if !(a > 0.0 && a.is_finite()) || !(b > 0.0 && b.is_finite()) {
        return Err(Error::invariant(
            step,
            format!("barrier gaps must be positive, got a = {a}, b = {b}"),
        ));
    }
    Ok((a, b))
}

/// Per-candidate scores for one step.
#[derive(Debug, Clone)]
pub struct CandidateScores {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl CandidateScores {
    pub fn sum_alpha(&self) -> f64 {
        self.alphas.iter().sum()
    }

    pub fn sum_beta(&self) -> f64 {
        self.betas.iter().sum()
    }
}

/// `alpha_j = <U x, x> + <U^2 x, x> / a` and
/// `beta_j = <L^2 x, x> / b - <L x, x>` where
/// `U = (u_i I - A)^{-1}` and `L = (A - l_i I)^{-1}`.
///
/// For a certified isotropic frame the sums are also checked against
/// `sum alpha <= 1 - eps <= sum beta`.
pub fn candidate_scores(state: &BarrierState, frame: &Frame, a: f64, b: f64) -> Result<CandidateScores> {
    if frame.ambient_dim() != state.dim {
        return Err(Error::DimensionMismatch {
            expected: state.dim,
            got: frame.ambient_dim(),
        });
    }
    let step = state.step + 1;
    let up = Resolvent::new(&state.a, state.next_upper(), BarrierSide::Upper)
        .map_err(|e| Error::invariant(step, format!("upper barrier resolvent: {e}")))?;
    let low = Resolvent::new(&state.a, state.next_lower(), BarrierSide::Lower)
        .map_err(|e| Error::invariant(step, format!("lower barrier resolvent: {e}")))?;

    let (alphas, betas): (Vec<f64>, Vec<f64>) = frame
        .vectors()
        .par_iter()
        .map(|x| {
            let (u1, u2) = up.quadratic_forms(x);
            let (l1, l2) = low.quadratic_forms(x);
            (u1 + u2 / a, l2 / b - l1)
        })
        .unzip();
    let scores = CandidateScores { alphas, betas };

    if frame.is_isotropy_certified() {
        let target = 1.0 - state.eps;
        let (sa, sb) = (scores.sum_alpha(), scores.sum_beta());
        if sa > target + CERTIFICATE_SLACK {
            return Err(Error::invariant(
                step,
                format!("sum of alphas {sa} exceeds 1 - eps = {target}"),
            ));
        }
        if sb < target - CERTIFICATE_SLACK {
            return Err(Error::invariant(
                step,
                format!("sum of betas {sb} is below 1 - eps = {target}"),
            ));
        }
        if sb < sa - FEASIBILITY_SLACK {
            return Err(Error::invariant(
                step,
                format!("sum of betas {sb} is below sum of alphas {sa}"),
            ));
        }
    }
    Ok(scores)
}

/// Diagnostics for one barrier move.
#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub chosen: usize,
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub sum_alpha: f64,
    pub sum_beta: f64,
    /// `beta_j - alpha_j` for the chosen candidate.
    pub margin: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lower: f64,
    pub upper: f64,
    pub upper_potential: f64,
    pub lower_potential: f64,
    /// Lower potential after the move predicted by the rank-one trace
    /// identity from pre-move quantities.
    pub predicted_lower_potential: f64,
}

/// Picks `j = argmax (beta_j - alpha_j)` (lowest index on ties), moves by
/// `t = 1 / alpha_j`, and verifies the window and both potentials.
pub fn select_and_step(
    state: &BarrierState,
    frame: &Frame,
    scores: &CandidateScores,
    gaps: (f64, f64),
) -> Result<(BarrierState, StepRecord)> {
    let step = state.step + 1;
    let mut best: Option<(usize, f64)> = None;
    for (j, (&al, &be)) in scores.alphas.iter().zip(&scores.betas).enumerate() {
        // zero vectors have alpha = 0 and cannot move the spectrum
        if !(al > 0.0) {
            continue;
        }
        let margin = be - al;
        if best.is_none_or(|(_, m)| margin > m) {
            best = Some((j, margin));
        }
    }
    let (chosen, margin) = match best {
        Some((j, m)) if m >= -FEASIBILITY_SLACK => (j, m),
        other => {
            return Err(Error::NoFeasibleCandidate {
                step,
                rule: "beta_j >= alpha_j",
                margin: other.map_or(f64::NEG_INFINITY, |(_, m)| m),
            })
        }
    };
    let alpha = scores.alphas[chosen];
    let t = 1.0 / alpha;
    let x = frame.vector(chosen);

    // Lower potential after the move, from the rank-one trace identity.
    let low = Resolvent::new(&state.a, state.next_lower(), BarrierSide::Lower)
        .map_err(|e| Error::invariant(step, format!("lower barrier resolvent: {e}")))?;
    let lower_next = state.next_lower();
    let trace_before: f64 = state.eig.values.iter().map(|l| 1.0 / (l - lower_next)).sum();
    let sqrt_t = t.sqrt();
    let z: Vec<f64> = x.iter().map(|v| v * sqrt_t).collect();
    let rz: Vec<f64> = low.apply(&z);
    let (_, q2) = low.quadratic_forms(x);
    let predicted_lower_potential = trace_after_rank_one(trace_before, &rz, t * q2, &z)?;

    let mut a_next = state.a.clone();
    a_next.add_outer(t, x);
    let next = BarrierState::at_step(step, state.dim, state.eps, a_next)?;

    let (lmin, lmax) = (next.eig.lambda_min(), next.eig.lambda_max());
    if !(lmin > next.lower) || !(lmax < next.upper) {
        return Err(Error::invariant(
            step,
            format!(
                "spectrum [{lmin}, {lmax}] escaped the window ({}, {})",
                next.lower, next.upper
            ),
        ));
    }
    let conserved = state.eps / state.theta;
    if (next.upper_potential - conserved).abs() > UPPER_POTENTIAL_RTOL * conserved {
        return Err(Error::invariant(
            step,
            format!(
                "upper potential {} drifted from eps/theta = {conserved}",
                next.upper_potential
            ),
        ));
    }
    if next.lower_potential > state.lower_potential + LOWER_POTENTIAL_SLACK
        || next.lower_potential > state.eps + CERTIFICATE_SLACK
    {
        return Err(Error::invariant(
            step,
            format!(
                "lower potential rose from {} to {}",
                state.lower_potential, next.lower_potential
            ),
        ));
    }

    let record = StepRecord {
        step,
        chosen,
        t,
        a: gaps.0,
        b: gaps.1,
        sum_alpha: scores.sum_alpha(),
        sum_beta: scores.sum_beta(),
        margin,
        lambda_min: lmin,
        lambda_max: lmax,
        lower: next.lower,
        upper: next.upper,
        upper_potential: next.upper_potential,
        lower_potential: next.lower_potential,
        predicted_lower_potential,
    };
    Ok((next, record))
}

/// One full barrier step: gaps, scores, selection.
pub fn advance(state: &BarrierState, frame: &Frame) -> Result<(BarrierState, StepRecord)> {
    let gaps = barrier_gaps(state)?;
    let scores = candidate_scores(state, frame, gaps.0, gaps.1)?;
    select_and_step(state, frame, &scores, gaps)
}

/// Result of a sparsification run with its certificate.
#[derive(Debug, Clone, Serialize)]
pub struct BssOutcome {
    /// Weights normalized so that the weighted operator lies between
    /// `(1 - eps)^2` and `(1 + eps)^2` times the original on its range.
    pub weights: SparseWeights,
    pub eps: f64,
    pub theta: f64,
    /// Dimension of the range the iteration ran in.
    pub reduced_dim: usize,
    pub iterations: usize,
    /// `(1 - eps)^2 / lambda_min(A_k)`.
    pub gamma: f64,
    /// `lambda_max(A_k) / lambda_min(A_k)`, at most `theta^2`.
    pub unscaled_ratio: f64,
    /// Extreme eigenvalues of the rescaled weighted operator in whitened
    /// coordinates, recomputed from the final weights.
    pub certified_min: f64,
    pub certified_max: f64,
    #[serde(skip)]
    pub steps: Vec<StepRecord>,
}

impl BssOutcome {
    /// Bound on the support, `ceil(r / eps^2)`.
    pub fn support_bound(&self) -> usize {
        iteration_count(self.reduced_dim, self.eps)
    }

    /// Weights rescaled so the lower sandwich constant is exactly one.
    pub fn unit_floor_weights(&self) -> SparseWeights {
        let floor = (1.0 - self.eps).powi(2);
        self.weights.scaled(1.0 / floor)
    }
}

#[derive(Debug, Clone)]
pub struct BssSparsifier {
    eps: f64,
    rank_tol: Option<f64>,
    keep_trace: bool,
}

impl BssSparsifier {
    pub fn new(eps: f64) -> Result<Self> {
        check_eps(eps)?;
        Ok(Self {
            eps,
            rank_tol: None,
            keep_trace: true,
        })
    }

    /// Overrides the range-restriction tolerance (default `n * f64::EPSILON`).
    pub fn with_rank_tol(mut self, tol: f64) -> Self {
        self.rank_tol = Some(tol);
        self
    }

    pub fn keep_trace(mut self, keep: bool) -> Self {
        self.keep_trace = keep;
        self
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn run(&self, frame: &Frame) -> Result<BssOutcome> {
        if frame.is_empty() {
            return Err(Error::ZeroFrame);
        }
        let reduced;
        let work = if frame.is_isotropy_certified() {
            frame
        } else {
            let tol = self.rank_tol.unwrap_or_else(|| default_rank_tol(frame.ambient_dim()));
            reduced = isotropic_reduce(frame, tol)?.0;
            &reduced
        };
        let n = work.ambient_dim();
        let k = iteration_count(n, self.eps);
        debug!(
            "barrier sparsification: m = {}, r = {n}, eps = {}, theta = {}, k = {k}",
            frame.len(),
            self.eps,
            theta(self.eps)
        );

        let mut state = BarrierState::initial(n, self.eps)?;
        let mut raw: BTreeMap<usize, f64> = BTreeMap::new();
        let mut steps = Vec::with_capacity(if self.keep_trace { k } else { 0 });
        for _ in 0..k {
            let (next, record) = advance(&state, work)?;
            *raw.entry(record.chosen).or_insert(0.0) += record.t;
            if self.keep_trace {
                steps.push(record);
            }
            state = next;
        }

        let lmin = state.eig.lambda_min();
        let lmax = state.eig.lambda_max();
        let floor = (1.0 - self.eps).powi(2);
        let gamma = floor / lmin;
        let unscaled_ratio = lmax / lmin;
        let th = theta(self.eps);
        if unscaled_ratio > th * th * (1.0 + CERTIFICATE_SLACK) {
            return Err(Error::Certification(format!(
                "condition number {unscaled_ratio} of A_k exceeds theta^2 = {}",
                th * th
            )));
        }
        let weights = SparseWeights::new(raw.into_iter().map(|(i, t)| (i, t * gamma)).collect(), frame.len())?;
        if weights.support() > k {
            return Err(Error::Certification(format!(
                "support {} exceeds ceil(n / eps^2) = {k}",
                weights.support()
            )));
        }

        // Independent re-assembly of the weighted operator from the weights.
        let certified = eigh(&work.weighted_operator(|i| weights.get(i)))?;
        let (cmin, cmax) = (certified.lambda_min(), certified.lambda_max());
        let ceiling = (1.0 + self.eps).powi(2);
        if cmin < floor - CERTIFICATE_SLACK || cmax > ceiling + CERTIFICATE_SLACK {
            return Err(Error::Certification(format!(
                "weighted spectrum [{cmin}, {cmax}] outside [{floor}, {ceiling}]"
            )));
        }

        Ok(BssOutcome {
            weights,
            eps: self.eps,
            theta: th,
            reduced_dim: n,
            iterations: k,
            gamma,
            unscaled_ratio,
            certified_min: cmin,
            certified_max: cmax,
            steps,
        })
    }
}

/// Sparsifies a frame with the default settings. Non-isotropic frames are
/// first restricted to the range of their frame operator and whitened; the
/// guarantee then holds for test vectors in that range.
pub fn sparsify_frame(frame: &Frame, eps: f64) -> Result<SparseWeights> {
    Ok(BssSparsifier::new(eps)?.keep_trace(false).run(frame)?.weights)
}
