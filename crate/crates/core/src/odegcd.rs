//! Two-level gradient-flow method for approximate common factors.
//!
//! The resultant `S = S_ℓ(A, B)` is perturbed to `S + εE` with `E` structured
//! and `‖E‖_F = 1`. At fixed `ε` (inner level) the flow
//!
//! ```text
//! Ė = −P(u vᵀ) + ⟨E, P(u vᵀ)⟩ E
//! ```
//!
//! decreases `σ_k(S + εE)`, the `k = q·d`-th smallest singular value, while
//! keeping `E` on the unit sphere. Between two values of `ε` (outer level)
//! the unconstrained flow `Ė = −P(u vᵀ)` grows `‖E‖` until the next level is
//! reached. Both flows are integrated by explicit Euler steps with
//! accept/reject step control, so every accepted step decreases `σ_k`.

use std::cell::Cell;
use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matpoly::{dist, FactorizationTriple, PolyPair};
use crate::numkernel::{is_coalesced_at_scale, kth_smallest_triplet, least_squares, smallest_svd, svd};
use crate::structmat::{
    build_with_layout, inner, poly_distance_of, project_rank_one, project_structure, read_coefficients,
    SylvesterLayout, SylvesterMatrix,
};
use crate::subspace::{exact_gcd_echelon_with, subspace_gcd_with, EchelonOptions, SubspaceOptions};

/// Smallest Euler step before an integration is declared stalled.
pub const MIN_STEP: f64 = 1e-14;

/// Singular values below `σ_k` within `CLUSTER_REL · σ_k + CLUSTER_ABS ·
/// σ_max(S)` are treated as coalesced with it.
pub const CLUSTER_REL: f64 = 1e-3;
pub const CLUSTER_ABS: f64 = 1e-6;

/// Seed of the directions used by the extra starts.
const START_STREAM: u64 = 0x5eed_0de;
/// Extra starts begin at this fraction of the best critical `ε` so far.
pub const START_FRACTION: f64 = 0.75;

/// Largest number of coalesced neighbors taken into account.
const MAX_CLUSTER: usize = 7;

/// Solver configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OdeParams {
    /// Initial perturbation size.
    pub eps0: f64,
    /// Initial outer increment; `None` uses `eps0`.
    pub delta: Option<f64>,
    /// Zero tolerance for `σ_k`, relative to `σ_max(S)`.
    pub tol: f64,
    /// Stationarity tolerance of the inner phase: it stops once
    /// `1 − |⟨E, P(uvᵀ)⟩| / ‖P(uvᵀ)‖ ≤ inner_tol`.
    pub inner_tol: f64,
    /// Initial Euler step.
    pub h0: f64,
    /// Step adaptation factor, `> 1`.
    pub gamma: f64,
    pub max_inner: usize,
    pub max_outer: usize,
    /// Outer refinement stops once the bracket around the critical `ε` is
    /// narrower than `refine_tol · ε`.
    pub refine_tol: f64,
    /// Resultant window; `None` uses `n(q + 1)`.
    pub ell: Option<usize>,
    /// Also extract the factor with the echelon method and compare.
    pub cross_check: bool,
    /// Number of continuation runs. The first starts at `eps0` from the
    /// steepest-descent direction; each further run starts at
    /// [`START_FRACTION`] of the best critical `ε` found so far, from a
    /// pseudo-random structured direction. The smallest converged `ε` wins
    /// and only its run is kept in the trace.
    pub starts: usize,
}

impl Default for OdeParams {
    fn default() -> Self {
        OdeParams {
            eps0: 1e-2,
            delta: None,
            tol: 1e-8,
            inner_tol: 1e-7,
            h0: 0.1,
            gamma: 1.2,
            max_inner: 5000,
            max_outer: 200,
            refine_tol: 1e-3,
            ell: None,
            cross_check: false,
            starts: 1,
        }
    }
}

impl OdeParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eps0", self.eps0),
            ("tol", self.tol),
            ("inner_tol", self.inner_tol),
            ("h0", self.h0),
            ("refine_tol", self.refine_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(dl) = self.delta {
            if !(dl > 0.0) || !dl.is_finite() {
                return Err(Error::Parameter(format!("delta must be positive, got {dl}")));
            }
        }
        if !(self.gamma > 1.0) {
            return Err(Error::Parameter(format!("gamma must exceed 1, got {}", self.gamma)));
        }
        if self.max_inner == 0 || self.max_outer == 0 || self.starts == 0 {
            return Err(Error::Parameter("iteration caps and starts must be positive".into()));
        }
        Ok(())
    }
}

/// Current point of the flow.
#[derive(Debug, Clone)]
pub struct InnerState {
    /// Structured perturbation direction with unit Frobenius norm.
    pub e: DMatrix<f64>,
    pub epsilon: f64,
    pub sigma: f64,
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    /// Singular pairs of the values just below `σ_k` that are coalesced with
    /// it (see [`CLUSTER_REL`]), nearest first.
    pub cluster: Vec<(DVector<f64>, DVector<f64>)>,
    /// Current Euler step.
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// Starting point of a run (or of a restart from an earlier state).
    Init,
    /// Norm-preserving flow at fixed `ε`.
    Constrained,
    /// Unconstrained flow growing `‖E‖`.
    Free,
    /// Return to an earlier outer state after overshooting the critical `ε`.
    Restart,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Init => "init",
            Phase::Constrained => "constrained",
            Phase::Free => "free",
            Phase::Restart => "restart",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub phase: Phase,
    /// Perturbation size of the phase; during a free phase the effective
    /// size is `epsilon · norm_e`.
    pub epsilon: f64,
    pub sigma_k: f64,
    pub norm_e: f64,
    pub h: f64,
    pub accepted: bool,
}

/// Append-only record of every Euler step of a solve.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct OdeTrace {
    pub records: Vec<TraceRecord>,
    /// `(ε, σ_k)` at the end of every accepted outer step.
    pub outer: Vec<(f64, f64)>,
    /// Every inner-phase exit with `σ_k` above tolerance.
    pub inner_exits: Vec<InnerExitRecord>,
}

/// State of the flow where an inner phase ended without reaching zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerExitRecord {
    pub epsilon: f64,
    pub sigma_k: f64,
    /// See [`alignment`].
    pub alignment: f64,
    /// False when the phase ended on the iteration cap or a stalled step
    /// size rather than at a stationary point.
    pub stationary: bool,
}

impl OdeTrace {
    fn push(&mut self, phase: Phase, st: &InnerState, norm_e: f64, h: f64, accepted: bool) {
        self.records.push(TraceRecord {
            phase,
            epsilon: st.epsilon,
            sigma_k: st.sigma,
            norm_e,
            h,
            accepted,
        });
    }

    pub const CSV_HEADER: &'static str = "phase,eps,sigma_k,norm_e,h,accepted";

    /// One line per record, preceded by [`OdeTrace::CSV_HEADER`].
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.phase,
                fmt_float(r.epsilon),
                fmt_float(r.sigma_k),
                fmt_float(r.norm_e),
                fmt_float(r.h),
                r.accepted
            )?;
        }
        Ok(())
    }
}

/// Shortest round-trip text for `x`, in exponent form when `|x|` is below
/// `1e-4` or at least `1e16`.
pub fn fmt_float(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Outcome of the optional echelon cross-check on the solver output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EchelonCheck {
    /// Echelon factor agrees with the subspace factor.
    Agrees { max_coeff_diff: f64 },
    /// Both have the expected degree but different coefficients.
    Differs { max_coeff_diff: f64 },
    /// The echelon method returned a constant factor.
    NoFactorRevealed,
    /// Leading coefficient of the echelon factor is singular.
    SingularLeadingBlock,
    /// The echelon factor has higher degree than requested.
    DegreeExcess { degree: usize },
    Failed { message: String },
}

/// Output of [`agcd_ode`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GcdResult {
    pub a_hat: crate::matpoly::MatPoly,
    pub b_hat: crate::matpoly::MatPoly,
    /// Factor extracted from `(Â, B̂)` by the subspace method, when it succeeds.
    pub triple: Option<FactorizationTriple>,
    pub epsilon: f64,
    /// `‖S_ℓ(Â, B̂) − S_ℓ(A, B)‖_F`, equal to `ε`.
    pub matrix_distance: f64,
    /// Coefficient distance between the input and `(Â, B̂)`.
    pub coeff_distance: f64,
    /// Final `σ_k(S + εE)`.
    pub sigma_k: f64,
    /// Absolute zero tolerance used for `σ_k`.
    pub tol: f64,
    pub converged: bool,
    pub outer_iterations: usize,
    pub extraction_warning: Option<String>,
    pub echelon_check: Option<EchelonCheck>,
}

/// Fixed data of one solve.
struct Problem {
    s: SylvesterMatrix,
    k: usize,
    tol: f64,
    cluster_floor: f64,
    warned: Cell<bool>,
}

impl Problem {
    fn layout(&self) -> &SylvesterLayout {
        &self.s.layout
    }

    /// `σ_k` and its singular vectors for `S + εE`.
    fn evaluate(&self, e: DMatrix<f64>, epsilon: f64, h: f64) -> Result<InnerState> {
        let m = &self.s.dense + &e * epsilon;
        // σ_{k+1} is only needed for the coalescence check.
        let p = (self.k + 1).min(m.nrows().min(m.ncols()));
        let (dec, sigma_max) = smallest_svd(&m, p)?;
        if !self.warned.get() && is_coalesced_at_scale(&dec, self.k, sigma_max) {
            log::debug!("target singular value is not simple; using the coalesced cluster");
            self.warned.set(true);
        }
        let t = kth_smallest_triplet(&dec, self.k)?;
        let cluster = cluster_of(&dec, self.k, self.cluster_floor);
        Ok(InnerState {
            e,
            epsilon,
            sigma: t.sigma,
            u: t.u,
            v: t.v,
            cluster,
            h,
        })
    }
}

fn cluster_of(dec: &crate::numkernel::SvdResult, k: usize, floor: f64) -> Vec<(DVector<f64>, DVector<f64>)> {
    let r = dec.singular_values.len();
    let idx = r - k;
    let sk = dec.singular_values[idx];
    (idx + 1..r)
        .take(MAX_CLUSTER)
        .take_while(|&i| sk - dec.singular_values[i] <= CLUSTER_REL * sk + floor)
        .map(|i| (dec.u.column(i).into_owned(), dec.v.column(i).into_owned()))
        .collect()
}

/// Weights of the minimum-norm point of the convex hull of `vs`.
fn min_norm_weights(vs: &[DMatrix<f64>]) -> Vec<f64> {
    let c = vs.len();
    if c == 1 {
        return vec![1.0];
    }
    let gram = DMatrix::from_fn(c, c, |i, j| inner(&vs[i], &vs[j]));
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << c) {
        let idx: Vec<usize> = (0..c).filter(|i| mask & (1 << i) != 0).collect();
        let g = DMatrix::from_fn(idx.len(), idx.len(), |a, b| gram[(idx[a], idx[b])]);
        let ones = DMatrix::from_element(idx.len(), 1, 1.0);
        let Ok(w) = least_squares(&g, &ones) else { continue };
        let total: f64 = w.iter().sum();
        if !(total > 0.0) || w.iter().any(|&x| x < -1e-12 * total) {
            continue;
        }
        let mut lambda = vec![0.0; c];
        for (a, &i) in idx.iter().enumerate() {
            lambda[i] = w[(a, 0)].max(0.0) / total;
        }
        let l = DVector::from_column_slice(&lambda);
        let val = (l.transpose() * &gram * &l)[(0, 0)];
        if best.as_ref().is_none_or(|(b, _)| val < *b) {
            best = Some((val, lambda));
        }
    }
    best.map(|(_, l)| l).unwrap_or_else(|| {
        let mut l = vec![0.0; c];
        l[0] = 1.0;
        l
    })
}

/// Steepest-descent gradient of `σ_k` at `state`: `P(uvᵀ)` when `σ_k` is
/// simple, otherwise the combination `Σ λ_i P(u_i v_iᵀ)` over the coalesced
/// cluster whose (tangent, if `on_sphere`) part has minimum norm.
pub fn descent_gradient(state: &InnerState, layout: &SylvesterLayout, on_sphere: bool) -> Result<DMatrix<f64>> {
    let g = project_rank_one(&state.u, &state.v, layout)?.dense;
    if state.cluster.is_empty() {
        return Ok(g);
    }
    let mut gs = vec![g];
    for (u, v) in &state.cluster {
        gs.push(project_rank_one(u, v, layout)?.dense);
    }
    let lambda = if on_sphere {
        let ee = state.e.norm_squared();
        let ts: Vec<DMatrix<f64>> = gs.iter().map(|g| g - &state.e * (inner(&state.e, g) / ee)).collect();
        min_norm_weights(&ts)
    } else {
        min_norm_weights(&gs)
    };
    let mut out = DMatrix::zeros(layout.rows(), layout.cols());
    for (l, g) in lambda.iter().zip(&gs) {
        out += g * *l;
    }
    Ok(out)
}

/// `σ̇_k = ε uᵀ Ė v`.
pub fn sigma_derivative(state: &InnerState, edot: &DMatrix<f64>) -> f64 {
    state.epsilon * (state.u.transpose() * edot * &state.v)[(0, 0)]
}

/// Right-hand side of the norm-preserving flow at `state`.
pub fn gradient_direction(state: &InnerState, layout: &SylvesterLayout) -> Result<DMatrix<f64>> {
    let g = descent_gradient(state, layout, true)?;
    direction_from(&state.e, &g)
}

fn direction_from(e: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if g.norm() == 0.0 {
        return Err(Error::Numeric("projected gradient vanished".into()));
    }
    Ok(e * inner(e, g) - g)
}

/// `|⟨E, G⟩| / ‖G‖` with `G` from [`descent_gradient`]; equals 1 exactly at
/// stationary points. For simple `σ_k`, `G = P(uvᵀ)`.
pub fn alignment(state: &InnerState, layout: &SylvesterLayout) -> Result<f64> {
    let g = descent_gradient(state, layout, true)?;
    Ok(inner(&state.e, &g).abs() / (g.norm() * state.e.norm()))
}

/// Initial state for the flow at `epsilon`: `E` is the normalized steepest
/// descent direction `−P(uvᵀ)` of the unperturbed resultant.
pub fn initial_state(s: &SylvesterMatrix, k: usize, epsilon: f64, h0: f64) -> Result<InnerState> {
    let dec = svd(&s.dense)?;
    let floor = CLUSTER_ABS * dec.sigma_max();
    let e = steepest_start(s, k)?;
    let m = &s.dense + &e * epsilon;
    let dec = svd(&m)?;
    let t = kth_smallest_triplet(&dec, k)?;
    Ok(InnerState {
        e,
        epsilon,
        sigma: t.sigma,
        u: t.u,
        v: t.v,
        cluster: cluster_of(&dec, k, floor),
        h: h0,
    })
}

fn steepest_start(s: &SylvesterMatrix, k: usize) -> Result<DMatrix<f64>> {
    let dec = svd(&s.dense)?;
    let t = kth_smallest_triplet(&dec, k)?;
    let g = project_rank_one(&t.u, &t.v, &s.layout)?.dense;
    let norm = g.norm();
    if norm == 0.0 {
        return Err(Error::Numeric("projected gradient vanished".into()));
    }
    Ok(g / (-norm))
}

/// Unit-norm structured direction from a Gaussian matrix.
fn random_start(layout: &SylvesterLayout, rng: &mut ChaCha8Rng) -> Result<DMatrix<f64>> {
    let g = DMatrix::from_fn(layout.rows(), layout.cols(), |_, _| StandardNormal.sample(rng));
    let e = project_structure(&g, layout)?.dense;
    let norm = e.norm();
    Ok(e / norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InnerExit {
    /// `E` is aligned with the projected gradient.
    Stationary,
    /// `σ_k` reached the zero tolerance.
    Zero,
    /// No step size gave a decrease.
    Stalled,
    MaxIter,
}

fn run_inner(
    prob: &Problem,
    mut st: InnerState,
    p: &OdeParams,
    trace: &mut OdeTrace,
) -> Result<(InnerState, InnerExit)> {
    if st.sigma <= prob.tol {
        return Ok((st, InnerExit::Zero));
    }
    for _ in 0..p.max_inner {
        let g = descent_gradient(&st, prob.layout(), true)?;
        let edot = direction_from(&st.e, &g)?;
        if 1.0 - inner(&st.e, &g).abs() / g.norm() <= p.inner_tol {
            return Ok((st, InnerExit::Stationary));
        }
        let mut h = st.h;
        let mut rejected = false;
        loop {
            let mut e_new = &st.e + &edot * h;
            e_new = project_structure(&e_new, prob.layout())?.dense;
            let nrm = e_new.norm();
            e_new /= nrm;
            let cand = prob.evaluate(e_new, st.epsilon, h)?;
            if cand.sigma > st.sigma {
                trace.push(Phase::Constrained, &cand, 1.0, h, false);
                h /= p.gamma;
                rejected = true;
                if h < MIN_STEP {
                    return Ok((st, InnerExit::Stalled));
                }
                continue;
            }
            trace.push(Phase::Constrained, &cand, 1.0, h, true);
            st = cand;
            st.h = if rejected { h } else { h * p.gamma };
            if st.sigma <= prob.tol {
                return Ok((st, InnerExit::Zero));
            }
            break;
        }
    }
    Ok((st, InnerExit::MaxIter))
}

/// Integrates the norm-preserving flow at fixed `ε` until `σ_k` stagnates,
/// reaches the zero tolerance `p.tol · σ_max(s)`, or `p.max_inner` steps
/// are taken.
pub fn inner_iteration(s: &SylvesterMatrix, state: InnerState, k: usize, p: &OdeParams) -> Result<(InnerState, OdeTrace)> {
    p.validate()?;
    let prob = problem_for(s, k, p)?;
    let mut trace = OdeTrace::default();
    let (st, exit) = run_inner(&prob, state, p, &mut trace)?;
    match exit {
        InnerExit::Stalled => Err(Error::Stalled {
            phase: "constrained",
            epsilon: st.epsilon,
        }),
        InnerExit::MaxIter => {
            log::warn!("inner iteration hit max_inner = {} at epsilon = {:e}", p.max_inner, st.epsilon);
            Ok((st, trace))
        }
        _ => Ok((st, trace)),
    }
}

fn problem_for(s: &SylvesterMatrix, k: usize, p: &OdeParams) -> Result<Problem> {
    let sigma_max = svd(&s.dense)?.sigma_max();
    Ok(Problem {
        s: s.clone(),
        k,
        tol: p.tol * sigma_max,
        cluster_floor: CLUSTER_ABS * sigma_max,
        warned: Cell::new(false),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FreeExit {
    Reached,
    Zero,
}

/// Largest `t ≤ h` with `‖E − t g‖ ≤ target`.
fn clip_to_norm(e: &DMatrix<f64>, g: &DMatrix<f64>, h: f64, target: f64) -> f64 {
    let eg = inner(e, g);
    let gg = g.norm_squared();
    let ee = e.norm_squared();
    let disc = eg * eg - gg * (ee - target * target);
    if gg == 0.0 || disc < 0.0 {
        return h;
    }
    let t = (eg + disc.sqrt()) / gg;
    if t > 0.0 {
        h.min(t)
    } else {
        h
    }
}

fn run_free(
    prob: &Problem,
    st: InnerState,
    eps_target: f64,
    p: &OdeParams,
    trace: &mut OdeTrace,
) -> Result<(InnerState, FreeExit)> {
    let base = st.epsilon;
    let ratio = eps_target / base;
    if ratio <= 1.0 {
        return Ok((st, FreeExit::Reached));
    }
    let mut e = st.e.clone();
    let mut cur = st;
    let mut h = cur.h;
    let finish = |e: DMatrix<f64>, mut cur: InnerState, h: f64| -> InnerState {
        let nrm = e.norm();
        cur.e = e / nrm;
        cur.epsilon = base * nrm;
        cur.h = h;
        cur
    };
    for _ in 0..p.max_inner {
        let nrm = e.norm();
        if nrm >= ratio * (1.0 - 1e-14) {
            return Ok((finish(e, cur, h), FreeExit::Reached));
        }
        let g = descent_gradient(&cur, prob.layout(), false)?;
        let mut rejected = false;
        loop {
            let step = clip_to_norm(&e, &g, h, ratio);
            let mut e_new = &e - &g * step;
            e_new = project_structure(&e_new, prob.layout())?.dense;
            let cand = prob.evaluate(e_new.clone(), base, step)?;
            if cand.sigma > cur.sigma {
                trace.push(Phase::Free, &cand, e_new.norm(), step, false);
                h = step / p.gamma;
                rejected = true;
                if h < MIN_STEP {
                    return Err(Error::Stalled {
                        phase: "free",
                        epsilon: base * e.norm(),
                    });
                }
                continue;
            }
            trace.push(Phase::Free, &cand, e_new.norm(), step, true);
            e = e_new;
            cur = cand;
            if !rejected && step == h {
                h *= p.gamma;
            }
            if cur.sigma <= prob.tol {
                return Ok((finish(e, cur, h), FreeExit::Zero));
            }
            break;
        }
    }
    if e.norm() >= ratio * (1.0 - 1e-14) {
        return Ok((finish(e, cur, h), FreeExit::Reached));
    }
    Err(Error::ContinuationStall {
        epsilon: base * e.norm(),
    })
}

/// Integrates the unconstrained flow from `state` until the perturbation
/// reaches size `eps_target`; returns the state with `E` renormalized and
/// `ε` updated.
pub fn free_gradient_phase(
    s: &SylvesterMatrix,
    state: InnerState,
    eps_target: f64,
    k: usize,
    p: &OdeParams,
) -> Result<(InnerState, OdeTrace)> {
    p.validate()?;
    let prob = problem_for(s, k, p)?;
    let mut trace = OdeTrace::default();
    let (st, _) = run_free(&prob, state, eps_target, p, &mut trace)?;
    Ok((st, trace))
}

/// Approximate common right factor of degree `d` by the two-level flow.
pub fn agcd_ode(pair: &PolyPair, d: usize, p: &OdeParams) -> Result<(GcdResult, OdeTrace)> {
    p.validate()?;
    let n = pair.degree();
    if d == 0 || d > n {
        return Err(Error::Parameter(format!(
            "factor degree must satisfy 0 < d <= n = {n}, got {d}"
        )));
    }
    let layout = SylvesterLayout::for_pair(pair, p.ell)?;
    let s = build_with_layout(pair, layout)?;
    let k = layout.q * d;
    if k > layout.rows().min(layout.cols()) {
        return Err(Error::Parameter(format!(
            "resultant of shape {:?} has fewer than {k} singular values",
            layout.shape()
        )));
    }
    let prob = problem_for(&s, k, p)?;

    let dec = svd(&s.dense)?;
    let sigma0 = dec.kth_smallest(k);
    let zero_state = InnerState {
        e: DMatrix::zeros(layout.rows(), layout.cols()),
        epsilon: 0.0,
        sigma: sigma0,
        u: DVector::zeros(0),
        v: DVector::zeros(0),
        cluster: Vec::new(),
        h: p.h0,
    };
    if sigma0 <= prob.tol {
        let mut trace = OdeTrace::default();
        trace.push(Phase::Init, &zero_state, 0.0, p.h0, true);
        return Ok((finish_result(pair, d, &prob, &zero_state, true, 0, p)?, trace));
    }

    let mut trace = OdeTrace::default();
    let mut run = continuation(&prob, steepest_start(&s, k)?, p.eps0, p, &mut trace)?;
    let mut rng = ChaCha8Rng::seed_from_u64(START_STREAM);
    for i in 1..p.starts {
        let eps = if run.converged { START_FRACTION * run.state.epsilon } else { p.eps0 };
        let mut t = OdeTrace::default();
        let cand = continuation(&prob, random_start(&layout, &mut rng)?, eps, p, &mut t)?;
        let better = cand.converged && (!run.converged || cand.state.epsilon < run.state.epsilon);
        log::debug!("start {}: epsilon = {:e}, converged = {}", i + 1, cand.state.epsilon, cand.converged);
        if better {
            run = cand;
            trace = t;
        }
    }
    Ok((finish_result(pair, d, &prob, &run.state, run.converged, run.outer, p)?, trace))
}

/// End point of one continuation run.
struct RunOutcome {
    state: InnerState,
    converged: bool,
    outer: usize,
}

/// Outer continuation from `e0` at size `eps0` until the critical `ε` is
/// bracketed to `p.refine_tol`.
fn continuation(
    prob: &Problem,
    e0: DMatrix<f64>,
    eps0: f64,
    p: &OdeParams,
    trace: &mut OdeTrace,
) -> Result<RunOutcome> {
    // First inner phase. If it already reaches zero, the starting ε was
    // past the critical value: halve it and retry.
    let mut eps = eps0;
    let mut state: Option<InnerState> = None;
    let mut best: Option<InnerState> = None;
    let mut attempts = 0;
    loop {
        let init = prob.evaluate(e0.clone(), eps, p.h0)?;
        trace.push(if attempts == 0 { Phase::Init } else { Phase::Restart }, &init, 1.0, p.h0, true);
        let (st, exit) = run_inner(prob, init, p, trace)?;
        if exit == InnerExit::Zero {
            best = Some(st);
            attempts += 1;
            if attempts > 50 {
                break;
            }
            eps /= 2.0;
            continue;
        }
        record_inner_exit(prob, &st, exit, trace)?;
        state = Some(st);
        break;
    }
    let mut state = match state.take() {
        Some(st) => st,
        None => {
            // Zero reached at every tried size; take the smallest.
            let st = best.expect("at least one attempt");
            return Ok(RunOutcome {
                state: st,
                converged: true,
                outer: 0,
            });
        }
    };
    trace.outer.push((state.epsilon, state.sigma));

    let mut delta = p.delta.unwrap_or(p.eps0);
    if let Some(b) = &best {
        // Critical size already bracketed by the restarts.
        delta = (b.epsilon - state.epsilon) / 2.0;
    }
    let mut bracketed = best.is_some();
    let mut outer = 0;
    while outer < p.max_outer {
        outer += 1;
        if let Some(b) = &best {
            if b.epsilon - state.epsilon <= p.refine_tol * b.epsilon {
                break;
            }
        }
        let target = state.epsilon + delta;
        let (free_st, free_exit) = match run_free(prob, state.clone(), target, p, trace) {
            Ok(x) => x,
            Err(Error::Stalled { .. }) => {
                log::debug!("free phase stalled at epsilon = {:e}", state.epsilon);
                if bracketed {
                    delta /= 2.0;
                    continue;
                }
                break;
            }
            Err(e) => return Err(e),
        };
        let (cand, hit, exit) = if free_exit == FreeExit::Zero {
            (free_st, true, InnerExit::Zero)
        } else {
            let (st, exit) = run_inner(prob, free_st, p, trace)?;
            if exit == InnerExit::MaxIter {
                log::debug!("inner iteration hit max_inner at epsilon = {:e}", st.epsilon);
            }
            (st, exit == InnerExit::Zero, exit)
        };
        if hit {
            if best.as_ref().is_none_or(|b| cand.epsilon < b.epsilon) {
                best = Some(cand);
            }
            bracketed = true;
            let b = best.as_ref().expect("just set");
            delta = (b.epsilon - state.epsilon) / 2.0;
            trace.push(Phase::Restart, &state, 1.0, state.h, true);
        } else {
            record_inner_exit(prob, &cand, exit, trace)?;
            state = cand;
            trace.outer.push((state.epsilon, state.sigma));
            if !bracketed {
                delta *= 2.0;
            }
        }
    }

    Ok(match best {
        Some(b) => RunOutcome {
            state: b,
            converged: true,
            outer,
        },
        None => {
            log::warn!(
                "no convergence after {outer} outer iterations (sigma_k = {:e} at epsilon = {:e})",
                state.sigma,
                state.epsilon
            );
            RunOutcome {
                state,
                converged: false,
                outer,
            }
        }
    })
}

fn record_inner_exit(prob: &Problem, st: &InnerState, exit: InnerExit, trace: &mut OdeTrace) -> Result<()> {
    if st.sigma > prob.tol {
        trace.inner_exits.push(InnerExitRecord {
            epsilon: st.epsilon,
            sigma_k: st.sigma,
            alignment: alignment(st, prob.layout())?,
            stationary: exit == InnerExit::Stationary,
        });
    }
    Ok(())
}

fn finish_result(
    pair: &PolyPair,
    d: usize,
    prob: &Problem,
    st: &InnerState,
    converged: bool,
    outer_iterations: usize,
    p: &OdeParams,
) -> Result<GcdResult> {
    let layout = *prob.layout();
    let perturbed = SylvesterMatrix {
        layout,
        dense: &prob.s.dense + &st.e * st.epsilon,
    };
    let hat = if st.epsilon == 0.0 {
        pair.clone()
    } else {
        read_coefficients(&perturbed)?
    };
    let coeff_distance = dist(pair, &hat)?;
    debug_assert!(st.epsilon == 0.0 || (coeff_distance - poly_distance_of(st.epsilon, &layout)).abs() < 1e-8);

    let (triple, extraction_warning) = if d == pair.degree() {
        // Constant cofactors: the subspace extractor needs d < n.
        (None, Some(format!("no factor extracted for d = n = {d}")))
    } else {
        match subspace_gcd_with(&hat, d, SubspaceOptions { ell: Some(layout.ell) }) {
            Ok((t, _)) => (Some(t), None),
            Err(e) => {
                log::warn!("factor extraction failed: {e}");
                (None, Some(e.to_string()))
            }
        }
    };
    let echelon_check = p.cross_check.then(|| {
        let opts = EchelonOptions {
            pivot_tol: (100.0 * p.tol).max(1e-10),
            ..EchelonOptions::default()
        };
        match exact_gcd_echelon_with(&hat, opts) {
            Ok(g) if g.degree() == 0 => EchelonCheck::NoFactorRevealed,
            Ok(g) if g.degree() > d => EchelonCheck::DegreeExcess { degree: g.degree() },
            Ok(g) => match &triple {
                Some(t) => {
                    let diff = g.max_abs_diff(&t.c);
                    if diff <= 1e-4 * (1.0 + t.c.norm_squared().sqrt()) {
                        EchelonCheck::Agrees { max_coeff_diff: diff }
                    } else {
                        EchelonCheck::Differs { max_coeff_diff: diff }
                    }
                }
                None => EchelonCheck::Differs {
                    max_coeff_diff: f64::INFINITY,
                },
            },
            Err(Error::Normalization { .. }) => EchelonCheck::SingularLeadingBlock,
            Err(e) => EchelonCheck::Failed { message: e.to_string() },
        }
    });

    Ok(GcdResult {
        a_hat: hat.a,
        b_hat: hat.b,
        triple,
        epsilon: st.epsilon,
        matrix_distance: st.epsilon,
        coeff_distance,
        sigma_k: st.sigma,
        tol: prob.tol,
        converged,
        outer_iterations,
        extraction_warning,
        echelon_check,
    })
}
