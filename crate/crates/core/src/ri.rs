//! Restricted invertibility: choose columns on which an operator stays
//! well conditioned.
//!
//! For an isotropic frame `x_1, ..., x_m` of `R^n` and a nonzero `T`, the
//! selector returns `k = floor(eps^2 |T|_HS^2 / |T|^2)` distinct indices
//! such that every eigenvalue of the Gram matrix `(<T x_i, T x_j>)` is at
//! least `(1 - eps)^2 |T|_HS^2 / m`.
//!
//! The iteration keeps `A_i = sum_{j <= i} (T y_j)(T y_j)^T` with exactly
//! `i` eigenvalues above the barrier
//! `b_i = (1 - eps) / m * (|T|_HS^2 - i |T|^2 / eps)` and the rest zero,
//! while the potential `tr(T^* (A_i - b_i)^{-1} T)` strictly decreases.

use log::{debug, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::bss::check_eps;
use crate::error::{Error, Result};
use crate::linalg::{
    default_rank_tol, dot, eigh, isotropic_reduce, norm_sq, EigenDecomposition, Frame, Matrix, SymmetricMatrix,
};

/// Relative slack making the strict candidate inequality robust.
pub const STRICT_RTOL: f64 = 1e-12;
/// Tolerance, relative to `|A_i|`, for eigenvalues counted as zero.
pub const ZERO_EIGEN_RTOL: f64 = 1e-9;
/// Relative slack on the potential decrease.
pub const POTENTIAL_RTOL: f64 = 1e-9;

/// Selection size `floor(eps^2 hs / op)`.
pub fn ri_count(hs: f64, op: f64, eps: f64) -> usize {
    (eps * eps * hs / op).floor() as usize
}

/// The barrier `b_i` for `0 <= i <= k`.
pub fn ri_barrier(i: usize, hs: f64, op: f64, m: usize, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if !(op > 0.0) || !(hs >= op) || m == 0 {
        return Err(Error::InvalidArgument(format!(
            "need |T|^2 = {op} > 0, |T|_HS^2 = {hs} >= |T|^2 and m = {m} > 0"
        )));
    }
    let k = ri_count(hs, op, eps);
    if i > k {
        return Err(Error::InvalidArgument(format!("barrier index {i} exceeds k = {k}")));
    }
    Ok((1.0 - eps) / m as f64 * (hs - i as f64 * op / eps))
}

/// Constants fixed for one selection run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RiSchedule {
    pub hs: f64,
    pub op: f64,
    pub m: usize,
    pub eps: f64,
    pub k: usize,
}

impl RiSchedule {
    pub fn new(t: &Matrix, m: usize, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        let hs = t.frobenius_sq();
        if !(hs > 0.0) {
            return Err(Error::InvalidArgument("operator must be nonzero".into()));
        }
        let op = eigh(&t.gram())?.lambda_max();
        Ok(Self {
            hs,
            op,
            m,
            eps,
            k: ri_count(hs, op, eps),
        })
    }

    pub fn barrier(&self, i: usize) -> Result<f64> {
        ri_barrier(i, self.hs, self.op, self.m, self.eps)
    }

    /// `(1 - eps)^2 |T|_HS^2 / m`.
    pub fn floor(&self) -> f64 {
        (1.0 - self.eps).powi(2) * self.hs / self.m as f64
    }
}

/// `A_i` together with its barrier, selection, and potential.
#[derive(Debug, Clone)]
pub struct RiState {
    step: usize,
    a: SymmetricMatrix,
    eig: EigenDecomposition,
    b: f64,
    selected: Vec<usize>,
    potential: f64,
}

impl RiState {
    /// `A_0 = 0` in the codomain of `t`.
    pub fn initial(t: &Matrix, schedule: &RiSchedule) -> Result<Self> {
        Self::build(0, SymmetricMatrix::zeros(t.rows()), Vec::new(), t, schedule)
    }

    fn build(step: usize, a: SymmetricMatrix, selected: Vec<usize>, t: &Matrix, schedule: &RiSchedule) -> Result<Self> {
        let b = schedule.barrier(step)?;
        let eig = eigh(&a)?;
        let potential = trace_potential(&eig, t, b);
        Ok(Self {
            step,
            a,
            eig,
            b,
            selected,
            potential,
        })
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.a
    }

    pub fn spectrum(&self) -> &EigenDecomposition {
        &self.eig
    }

    pub fn barrier(&self) -> f64 {
        self.b
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    /// `tr(T^* (A_i - b_i)^{-1} T)`.
    pub fn potential(&self) -> f64 {
        self.potential
    }
}

/// Diagonal of `U^T T T^* U` for the eigenvectors `U` of `A`.
fn image_weights(eig: &EigenDecomposition, t: &Matrix) -> Vec<f64> {
    (0..eig.order()).map(|k| norm_sq(&t.t_matvec(&eig.vector(k)))).collect()
}

fn trace_potential(eig: &EigenDecomposition, t: &Matrix, b: f64) -> f64 {
    image_weights(eig, t)
        .iter()
        .zip(&eig.values)
        .map(|(g, l)| g / (l - b))
        .sum()
}

/// `tr(T^* (A - b_{i-1})^{-1} T) - tr(T^* (A - b_i)^{-1} T)` for `A = A_{i-1}`,
/// summed termwise in a form without cancellation.
pub fn ri_mu(state: &RiState, t: &Matrix, b_next: f64) -> f64 {
    let b_prev = state.b;
    image_weights(&state.eig, t)
        .iter()
        .zip(&state.eig.values)
        .map(|(g, l)| g * (b_prev - b_next) / ((l - b_prev) * (l - b_next)))
        .sum()
}

/// Both sides of the candidate inequality for `v = T x`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CandidateTest {
    /// `|T^* (A - b_i)^{-1} v|^2`.
    pub lhs: f64,
    /// `-mu (1 + <(A - b_i)^{-1} v, v>)`.
    pub rhs: f64,
    /// `1 + <(A - b_i)^{-1} v, v>`.
    pub denominator: f64,
}

impl CandidateTest {
    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }

    pub fn is_feasible(&self) -> bool {
        let scale = self.lhs.abs().max(self.rhs.abs()).max(1.0);
        self.lhs < self.rhs - STRICT_RTOL * scale
    }
}

/// Evaluates the candidate `x` against `A_{i-1}` (held in `state`) and the
/// next barrier `b_i`, using the spectral decomposition of `A_{i-1}`.
pub fn ri_candidate_test(state: &RiState, t: &Matrix, x: &[f64], b_next: f64, mu: f64) -> Result<CandidateTest> {
    if x.len() != t.cols() {
        return Err(Error::DimensionMismatch {
            expected: t.cols(),
            got: x.len(),
        });
    }
    let step = state.step + 1;
    let v = t.matvec(x);
    let c = state.eig.coordinates(&v);
    let mut scaled = Vec::with_capacity(c.len());
    for (ck, l) in c.iter().zip(&state.eig.values) {
        let d = l - b_next;
        if d.abs() <= f64::EPSILON * (l.abs() + b_next.abs()) {
            return Err(Error::invariant(
                step,
                format!("A - b I is singular: eigenvalue {l} equals barrier {b_next}"),
            ));
        }
        scaled.push(ck / d);
    }
    let w = state.eig.vectors.matvec(&scaled);
    let inner: f64 = c.iter().zip(&scaled).map(|(a, b)| a * b).sum();
    let lhs = norm_sq(&t.t_matvec(&w));
    let denominator = 1.0 + inner;
    Ok(CandidateTest {
        lhs,
        rhs: -mu * denominator,
        denominator,
    })
}

/// Diagnostics for one selection step.
#[derive(Debug, Clone, Serialize)]
pub struct RiStepRecord {
    pub step: usize,
    pub chosen: usize,
    pub barrier: f64,
    pub mu: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub denominator: f64,
    pub potential: f64,
    /// `|Q T|_HS^2` for the projection `Q` onto `ker A_{i-1}`.
    pub kernel_hs: f64,
}

/// Result of [`ri_select`] with its certificate.
#[derive(Debug, Clone, Serialize)]
pub struct RiOutcome {
    /// Selected indices in selection order.
    pub sigma: Vec<usize>,
    /// `(<T x_i, T x_j>)` over `sigma`.
    #[serde(skip)]
    pub gram: SymmetricMatrix,
    pub schedule: RiSchedule,
    pub stable_rank: f64,
    /// Absent when nothing was selected.
    pub gram_lambda_min: Option<f64>,
    pub bound: f64,
    /// Whether the frame had to be whitened first.
    pub whitened: bool,
    pub steps: Vec<RiStepRecord>,
}

/// Advances `A_{i-1}` to `A_i` and checks every per-step invariant.
pub fn ri_step(state: &RiState, frame: &Frame, t: &Matrix, schedule: &RiSchedule) -> Result<(RiState, RiStepRecord)> {
    let step = state.step + 1;
    let b_next = schedule.barrier(step)?;
    if !(b_next > 0.0) {
        return Err(Error::invariant(step, format!("barrier b = {b_next} is not positive")));
    }
    let mu = ri_mu(state, t, b_next);
    if !(mu >= 0.0) {
        return Err(Error::invariant(step, format!("mu = {mu} is negative")));
    }

    // Helper bound on the part of T seen by ker A_{i-1}.
    let norm_a = state.eig.lambda_max().abs();
    let weights = image_weights(&state.eig, t);
    let range_hs: f64 = weights
        .iter()
        .zip(&state.eig.values)
        .filter(|(_, l)| l.abs() > ZERO_EIGEN_RTOL * norm_a)
        .map(|(g, _)| g)
        .sum();
    let kernel_hs = schedule.hs - range_hs;
    let helper = schedule.hs - (step - 1) as f64 * schedule.op;
    if kernel_hs < helper - 1e-9 * schedule.hs {
        return Err(Error::invariant(
            step,
            format!("|QT|_HS^2 = {kernel_hs} below |T|_HS^2 - (i-1)|T|^2 = {helper}"),
        ));
    }

    let tests: Vec<CandidateTest> = frame
        .vectors()
        .par_iter()
        .map(|x| ri_candidate_test(state, t, x, b_next, mu))
        .collect::<Result<_>>()?;
    let mut best: Option<(usize, f64)> = None;
    for (j, test) in tests.iter().enumerate() {
        if test.is_feasible() && best.is_none_or(|(_, m)| test.margin() < m) {
            best = Some((j, test.margin()));
        }
    }
    let Some((chosen, _)) = best else {
        let margin = tests.iter().map(|t| t.margin()).fold(f64::INFINITY, f64::min);
        return Err(Error::NoFeasibleCandidate {
            step,
            rule: "lhs < -mu (1 + <(A - b)^{-1} Tx, Tx>)",
            margin,
        });
    };
    let test = tests[chosen];
    if !(test.denominator < 0.0) {
        return Err(Error::invariant(
            step,
            format!(
                "chosen candidate has 1 + <(A - b)^{{-1}} v, v> = {} >= 0",
                test.denominator
            ),
        ));
    }
    if state.selected.contains(&chosen) {
        return Err(Error::invariant(step, format!("index {chosen} selected twice")));
    }

    let v = t.matvec(frame.vector(chosen));
    let mut a = state.a.clone();
    a.add_outer(1.0, &v);
    let mut selected = state.selected.clone();
    selected.push(chosen);
    let next = RiState::build(step, a, selected, t, schedule)?;

    let norm = next.eig.lambda_max().abs();
    let above = next.eig.values.iter().filter(|&&l| l > next.b).count();
    let zero_ok = next
        .eig
        .values
        .get(step..)
        .unwrap_or(&[])
        .iter()
        .all(|l| l.abs() <= ZERO_EIGEN_RTOL * norm);
    if above != step || !zero_ok {
        return Err(Error::invariant(
            step,
            format!(
                "expected {step} eigenvalues above b = {} and the rest zero, spectrum {:?}",
                next.b, next.eig.values
            ),
        ));
    }
    if next.potential >= state.potential + POTENTIAL_RTOL * state.potential.abs() {
        return Err(Error::invariant(
            step,
            format!("potential rose from {} to {}", state.potential, next.potential),
        ));
    }
    let start = -(schedule.m as f64) / (1.0 - schedule.eps);
    if next.potential > start + POTENTIAL_RTOL * start.abs() {
        return Err(Error::invariant(
            step,
            format!("potential {} above its starting value {start}", next.potential),
        ));
    }

    let record = RiStepRecord {
        step,
        chosen,
        barrier: next.b,
        mu,
        lhs: test.lhs,
        rhs: test.rhs,
        denominator: test.denominator,
        potential: next.potential,
        kernel_hs,
    };
    Ok((next, record))
}

/// Selects `floor(eps^2 |T|_HS^2 / |T|^2)` frame indices on which `T` is
/// bounded below by `(1 - eps) |T|_HS / sqrt(m)`.
///
/// `t` maps the frame's space `R^n` to `R^p`. A frame that is not certified
/// isotropic is whitened first and `T` is composed with the inverse
/// whitening, which leaves every `T x_j` unchanged.
pub fn ri_select(frame: &Frame, t: &Matrix, eps: f64) -> Result<RiOutcome> {
    check_eps(eps)?;
    if frame.is_empty() {
        return Err(Error::ZeroFrame);
    }
    if t.cols() != frame.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: frame.ambient_dim(),
            got: t.cols(),
        });
    }
    let m = frame.len();
    let (work, t_eff, whitened) = if frame.is_isotropy_certified() {
        (frame.clone(), t.clone(), false)
    } else {
        let (reduced, map) = isotropic_reduce(frame, default_rank_tol(frame.ambient_dim()))?;
        let t_eff = t.matmul(&map.lift_matrix())?;
        (reduced, t_eff, true)
    };
    let schedule = RiSchedule::new(&t_eff, m, eps)?;
    debug!(
        "restricted invertibility: m = {m}, |T|_HS^2 = {}, |T|^2 = {}, k = {}",
        schedule.hs, schedule.op, schedule.k
    );
    if schedule.k == 0 {
        warn!(
            "stable rank {} is below 1 / eps^2 = {}: nothing to select",
            schedule.hs / schedule.op,
            1.0 / (eps * eps)
        );
    }

    let mut state = RiState::initial(&t_eff, &schedule)?;
    let mut steps = Vec::with_capacity(schedule.k);
    for _ in 0..schedule.k {
        let (next, record) = ri_step(&state, &work, &t_eff, &schedule)?;
        steps.push(record);
        state = next;
    }

    let sigma = state.selected.clone();
    let images: Vec<Vec<f64>> = sigma.iter().map(|&i| t.matvec(frame.vector(i))).collect();
    let gram = SymmetricMatrix::from_upper_fn(sigma.len(), |i, j| dot(&images[i], &images[j]));
    let bound = schedule.floor();
    let gram_lambda_min = if sigma.is_empty() {
        None
    } else {
        Some(eigh(&gram)?.lambda_min())
    };
    if let Some(gram_lambda_min) = gram_lambda_min.filter(|&l| l < bound - 1e-8) {
        return Err(Error::Certification(format!(
            "Gram matrix has lambda_min {gram_lambda_min} below (1 - eps)^2 |T|_HS^2 / m = {bound}"
        )));
    }
    Ok(RiOutcome {
        sigma,
        gram,
        schedule,
        stable_rank: schedule.hs / schedule.op,
        gram_lambda_min,
        bound,
        whitened,
        steps,
    })
}
