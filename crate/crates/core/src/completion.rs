//! PSD completion of partial matrices and the per-matrix expansion
//! distance.
//!
//! For a partial matrix A over a pattern G, `epsilon_at` computes the
//! smallest shift `eps` such that `A + eps I` has a PSD completion, by
//! solving
//!
//! ```text
//!   min eps  s.t.  M_ij = A_ij on edges, M_ii = A_ii + eps, M psd
//! ```
//!
//! with `eps` a free engine variable. The engine's dual slack is
//! simultaneously the certificate: a unit-trace PSD matrix Y supported on
//! the pattern with `<A, Y> = -eps` at the optimum. `dual_epsilon` solves
//! the certificate program directly (`min <A, Y>` over unit-trace
//! pattern-supported PSD Y) as an independent cross-check.
//!
//! The reported `epsilon` is clamped at zero: matrices strictly inside the
//! completable cone have a negative optimum, preserved in `raw_epsilon`,
//! and the stored completion then completes A itself.
//!
//! Cycle patterns get two closed-form routes: `rank2_cycle_feasible`
//! searches sign choices making the scaled-entry angles close up (a rank
//! at most 2 completion exists exactly when some signed angle sum is a
//! multiple of 2 pi), and `cycle_epsilon_bisect` finds the expansion
//! distance of a normal-form extreme ray by root-finding on the shifted
//! angle sum, no SDP involved.

use crate::graph::Graph;
use crate::numerics::{
    gram_factor, orthogonal_align, sym_eig, NumericsError, SymmetricMatrix, GRAM_CLAMP,
};
use crate::partial::{PartialMatrix, PartialMatrixError};
use crate::recognition::cycle_epsilon;
use crate::sdp::{solve_conic, ConicProgram, ConicRow, SdpError, SolveOptions, SolveStatus};
use serde::Serialize;
use thiserror::Error;

/// Longest cycle accepted by the exhaustive sign search (2^(n-1) choices).
pub const MAX_RANK2_CYCLE: usize = 24;
/// Largest pattern accepted by the hole enumeration in
/// [`cycle_constraints_satisfied`].
pub const MAX_HOLE_ENUMERATION: usize = 16;
/// Relative eigenvalue threshold for [`numerical_rank`] as stored in
/// [`CompletionResult::rank`].
pub const RANK_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum CompletionError {
    #[error(transparent)]
    Partial(#[from] PartialMatrixError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("solver stopped without convergence ({status:?})")]
    SolverDidNotConverge { status: SolveStatus },
    #[error("cycle has {n} vertices, sign search supports at most {MAX_RANK2_CYCLE}")]
    CycleTooLong { n: usize },
    #[error("scaled entry at edge ({u}, {v}) lies outside [-1, 1]; block is not psd")]
    EntryOutOfRange { u: usize, v: usize },
    #[error("matrix is not in cycle normal form: {reason}")]
    NotNormalForm { reason: String },
    #[error("sign vector does not close up (residual {residual:.3e})")]
    InfeasibleSignVector { residual: f64 },
    #[error("shared blocks disagree by {dev:.3e}")]
    SharedBlockMismatch { dev: f64 },
    #[error("bad shared-vertex pairing: {reason}")]
    BadSharedPairs { reason: String },
    #[error("pattern has {n} vertices, hole enumeration supports at most {MAX_HOLE_ENUMERATION}")]
    PatternTooLarge { n: usize },
    #[error("bisection bracket failed to cover the root; input outside the supported family")]
    BracketFailed,
}

/// Count of eigenvalues above `rel_tol * (1 + lambda_max)`.
pub fn numerical_rank(m: &SymmetricMatrix, rel_tol: f64) -> usize {
    let eig = sym_eig(m).expect("rank of a finite symmetric matrix");
    let cut = rel_tol * (1.0 + eig.max().max(0.0));
    eig.values.iter().filter(|&&l| l > cut).count()
}

/// Outcome of the shift minimization for one partial matrix.
#[derive(Debug, Clone, Serialize)]
pub struct CompletionResult {
    /// Smallest nonnegative shift with a PSD completion (raw optimum
    /// clamped at zero).
    pub epsilon: f64,
    /// Signed optimum; negative when every completion constraint is slack.
    pub raw_epsilon: f64,
    /// PSD completion of `A + epsilon * I`.
    pub completion: SymmetricMatrix,
    /// Unit-trace PSD certificate supported on the pattern with
    /// `<A, Y> = -epsilon` at the optimum.
    pub certificate: SymmetricMatrix,
    /// `-<A, Y>` evaluated from the certificate; matches `raw_epsilon` up
    /// to the duality gap.
    pub certificate_value: f64,
    /// Numerical rank of the completion at [`RANK_TOL`].
    pub rank: usize,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

/// Symmetric basis matrix with `<E, X> = X_ij`.
fn entry_matrix(n: usize, i: usize, j: usize) -> SymmetricMatrix {
    let mut e = SymmetricMatrix::zeros(n);
    e.set(i, j, if i == j { 1.0 } else { 0.5 });
    e
}

/// Minimal shift making the partial matrix completable, with completion
/// and dual certificate.
pub fn epsilon_at(a: &PartialMatrix, tol: f64) -> Result<CompletionResult, CompletionError> {
    let n = a.n();
    let mut rows = vec![];
    for i in 0..n {
        rows.push(ConicRow {
            blocks: vec![entry_matrix(n, i, i)],
            free: vec![-1.0],
            rhs: a.diag(i),
        });
    }
    for &(i, j) in a.graph().edges() {
        rows.push(ConicRow {
            blocks: vec![entry_matrix(n, i, j)],
            free: vec![0.0],
            rhs: a.edge(i, j).unwrap(),
        });
    }
    let prog = ConicProgram {
        block_sizes: vec![n],
        obj_blocks: vec![SymmetricMatrix::zeros(n)],
        obj_free: vec![1.0],
        rows,
        init_scale: 1.0,
    };
    let sol = solve_conic(&prog, &SolveOptions::with_tol(tol))?;
    if sol.status != SolveStatus::Optimal {
        return Err(CompletionError::SolverDidNotConverge { status: sol.status });
    }
    let raw = sol.u[0];
    let epsilon = raw.max(0.0);
    let raw_completion = sol.x_blocks.into_iter().next().unwrap();
    // The raw completion completes A + raw*I; when raw < 0 shift the
    // diagonal back up so the stored matrix completes A itself.
    let completion = if raw < 0.0 {
        raw_completion.shifted(-raw)
    } else {
        raw_completion
    };
    let certificate = sol.s_blocks.into_iter().next().unwrap();
    let certificate_value = -a.inner_full(&certificate);
    let rank = numerical_rank(&completion, RANK_TOL);
    Ok(CompletionResult {
        epsilon,
        raw_epsilon: raw,
        completion,
        certificate,
        certificate_value,
        rank,
        gap: sol.gap,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
        iterations: sol.iterations,
    })
}

/// Independent certificate route: minimizes `<A, Y>` over unit-trace PSD
/// matrices supported on the pattern. Returns the certified shift (the
/// negated optimum) and the optimal Y.
pub fn dual_epsilon(
    a: &PartialMatrix,
    tol: f64,
) -> Result<(f64, SymmetricMatrix), CompletionError> {
    let n = a.n();
    let mut rows = vec![ConicRow {
        blocks: vec![SymmetricMatrix::identity(n)],
        free: vec![],
        rhs: 1.0,
    }];
    for i in 0..n {
        for j in (i + 1)..n {
            if !a.graph().has_edge(i, j) {
                rows.push(ConicRow {
                    blocks: vec![entry_matrix(n, i, j)],
                    free: vec![],
                    rhs: 0.0,
                });
            }
        }
    }
    let prog = ConicProgram {
        block_sizes: vec![n],
        obj_blocks: vec![a.to_full_zero_filled()],
        obj_free: vec![],
        rows,
        init_scale: 1.0 / n as f64,
    };
    let sol = solve_conic(&prog, &SolveOptions::with_tol(tol))?;
    if sol.status != SolveStatus::Optimal {
        return Err(CompletionError::SolverDidNotConverge { status: sol.status });
    }
    Ok((-sol.pobj, sol.x_blocks.into_iter().next().unwrap()))
}

/// Completability verdict at a tolerance.
#[derive(Debug, Clone)]
pub enum Completability {
    Completable {
        completion: SymmetricMatrix,
    },
    /// `<A, Y> < -tol` for the unit-trace pattern-supported PSD
    /// certificate, which no completable matrix allows.
    NotCompletable {
        certificate: SymmetricMatrix,
        violation: f64,
    },
}

impl Completability {
    pub fn is_completable(&self) -> bool {
        matches!(self, Completability::Completable { .. })
    }
}

/// Whether the partial matrix has a PSD completion, with a completion or a
/// separating certificate. Solver breakdowns surface as errors, never as
/// verdicts.
pub fn is_psd_completable(a: &PartialMatrix, tol: f64) -> Result<Completability, CompletionError> {
    // Solve one order sharper than the decision threshold, capped at the
    // tolerance the interior point method reaches dependably on boundary
    // instances.
    let result = epsilon_at(a, (tol * 1e-1).clamp(1e-12, 1e-8))?;
    if result.raw_epsilon <= tol {
        // The stored completion completes A + clamped eps; shifting the
        // diagonal back reproduces A with eigenvalues above -tol.
        let completion = result.completion.shifted(-result.epsilon);
        Ok(Completability::Completable { completion })
    } else {
        Ok(Completability::NotCompletable {
            violation: result.certificate_value,
            certificate: result.certificate,
        })
    }
}

// ---------------------------------------------------------------------------
// Rank-2 cycle machinery.

/// Requires the standard cycle pattern and a positive diagonal; returns
/// the scaled entries `A_ij / sqrt(A_ii A_jj)` per edge `(i, i+1 mod n)`,
/// clamped into [-1, 1].
fn scaled_cycle_entries(a: &PartialMatrix) -> Result<Vec<f64>, CompletionError> {
    let n = a.n();
    if a.graph() != &Graph::cycle(n) {
        return Err(PartialMatrixError::NotCycle.into());
    }
    for v in 0..n {
        if a.diag(v) <= 0.0 {
            return Err(PartialMatrixError::NonpositiveDiagonal { v }.into());
        }
    }
    let mut scaled = Vec::with_capacity(n);
    for i in 0..n {
        let j = (i + 1) % n;
        let v = a.edge(i.min(j), i.max(j)).unwrap();
        let denom = (a.diag(i) * a.diag(j)).sqrt();
        let s = v / denom;
        if s.abs() > 1.0 + 1e-9 {
            return Err(CompletionError::EntryOutOfRange {
                u: i.min(j),
                v: i.max(j),
            });
        }
        scaled.push(s.clamp(-1.0, 1.0));
    }
    Ok(scaled)
}

#[derive(Debug, Clone, Serialize)]
pub struct Rank2Feasibility {
    pub feasible: bool,
    /// Per-edge signs of the best closure, edge i joining vertices
    /// `(i, i+1 mod n)`; lexicographically smallest optimum with the first
    /// sign fixed positive.
    pub signs: Option<Vec<i8>>,
    /// Integer winding of the best closure.
    pub winding: Option<i64>,
    /// Distance of the best signed angle sum from the winding target.
    pub residual: f64,
}

/// Searches all `2^(n-1)` sign choices for the cycle angles; a rank at
/// most 2 completion exists exactly when some signed sum of
/// `arccos(scaled entries)` is an integer multiple of 2 pi.
///
/// An edge block that is indefinite beyond rounding rules out completions
/// of every rank, reported as infeasible with an infinite residual.
pub fn rank2_cycle_feasible(
    a: &PartialMatrix,
    tol: Option<f64>,
) -> Result<Rank2Feasibility, CompletionError> {
    let n = a.n();
    if n > MAX_RANK2_CYCLE {
        return Err(CompletionError::CycleTooLong { n });
    }
    let tol = tol.unwrap_or(1e-8 * n as f64);
    let scaled = match scaled_cycle_entries(a) {
        Ok(s) => s,
        Err(CompletionError::EntryOutOfRange { .. }) => {
            return Ok(Rank2Feasibility {
                feasible: false,
                signs: None,
                winding: None,
                residual: f64::INFINITY,
            });
        }
        Err(e) => return Err(e),
    };
    let angles: Vec<f64> = scaled.iter().map(|s| s.acos()).collect();
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut best_residual = f64::INFINITY;
    let mut best: Option<(Vec<i8>, i64)> = None;
    // Global sign flip negates the sum, so the first sign stays positive.
    // Mask bit b flips edge n-1-b: ascending masks scan sign vectors in
    // lexicographic order with +1 before -1, so the first optimum found is
    // the lexicographically smallest.
    for mask in 0u64..(1u64 << (n - 1)) {
        let mut sum = angles[0];
        for (b, angle) in angles.iter().skip(1).rev().enumerate() {
            sum += if mask >> b & 1 == 1 { -angle } else { *angle };
        }
        let winding = (sum / two_pi).round();
        let residual = (sum - winding * two_pi).abs();
        if residual < best_residual {
            best_residual = residual;
            let mut signs = vec![1i8; n];
            for b in 0..(n - 1) {
                if mask >> b & 1 == 1 {
                    signs[n - 1 - b] = -1;
                }
            }
            best = Some((signs, winding as i64));
        }
    }
    let (signs, winding) = best.unwrap();
    let feasible = best_residual <= tol;
    Ok(Rank2Feasibility {
        feasible,
        signs: feasible.then_some(signs),
        winding: feasible.then_some(winding),
        residual: best_residual,
    })
}

/// Builds the rank at most 2 completion from a closing sign vector:
/// cumulative angles place each vertex on a circle and the completion is
/// the scaled Gram matrix of those positions.
pub fn rank2_cycle_completion(
    a: &PartialMatrix,
    signs: &[i8],
    winding: i64,
    tol: Option<f64>,
) -> Result<SymmetricMatrix, CompletionError> {
    let n = a.n();
    let tol = tol.unwrap_or(1e-8 * n as f64);
    let angles: Vec<f64> = scaled_cycle_entries(a)?.iter().map(|s| s.acos()).collect();
    if signs.len() != n {
        return Err(CompletionError::InfeasibleSignVector {
            residual: f64::INFINITY,
        });
    }
    let mut theta = vec![0.0; n];
    for i in 0..(n - 1) {
        theta[i + 1] = theta[i] + f64::from(signs[i]) * angles[i];
    }
    let closure = theta[n - 1] + f64::from(signs[n - 1]) * angles[n - 1]
        - winding as f64 * 2.0 * std::f64::consts::PI;
    if closure.abs() > tol {
        return Err(CompletionError::InfeasibleSignVector {
            residual: closure.abs(),
        });
    }
    let mut m = SymmetricMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = (a.diag(i) * a.diag(j)).sqrt() * (theta[i] - theta[j]).cos();
            m.set(i, j, v);
        }
    }
    Ok(m)
}

/// Expansion distance of a normal-form extreme ray of the cycle cone,
/// computed without the SDP engine. The input must be a trace-one cycle
/// matrix with positive diagonal, every edge block singular, and at most
/// one negative entry, located at edge (0, 1).
///
/// The shifted scaled entries have angle sum `g(eps)` strictly increasing
/// in the shift, and the matrix becomes completable exactly when
/// `g(eps) = pi`; the root is bracketed by `[0, cycle_epsilon(n)]`.
pub fn cycle_epsilon_bisect(a: &PartialMatrix, tol: Option<f64>) -> Result<f64, CompletionError> {
    let n = a.n();
    let scaled = scaled_cycle_entries(a)?;
    let tol = tol.unwrap_or(1e-9);
    if (a.trace() - 1.0).abs() > 1e-7 {
        return Err(CompletionError::NotNormalForm {
            reason: format!("trace is {}, expected 1", a.trace()),
        });
    }
    for (i, s) in scaled.iter().enumerate() {
        if (s.abs() - 1.0).abs() > 1e-6 {
            return Err(CompletionError::NotNormalForm {
                reason: format!("edge block {i} is not singular (scaled entry {s})"),
            });
        }
    }
    let negatives: Vec<usize> = scaled
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < 0.0)
        .map(|(i, _)| i)
        .collect();
    match negatives.as_slice() {
        [] => return Ok(0.0),
        [0] => {}
        _ => {
            return Err(CompletionError::NotNormalForm {
                reason: format!("negative entries at edges {negatives:?}, expected edge 0 only"),
            })
        }
    }
    // g(eps): sum of arccos of the down-scaled entry magnitudes.
    let g = |eps: f64| -> f64 {
        (0..n)
            .map(|i| {
                let j = (i + 1) % n;
                let num = (a.diag(i) * a.diag(j)).sqrt();
                let den = ((a.diag(i) + eps) * (a.diag(j) + eps)).sqrt();
                (num / den).clamp(-1.0, 1.0).acos()
            })
            .sum()
    };
    let (mut lo, mut hi) = (0.0f64, cycle_epsilon(n));
    if g(hi) < std::f64::consts::PI - 1e-9 {
        return Err(CompletionError::BracketFailed);
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < std::f64::consts::PI {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol * 1e-3 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---------------------------------------------------------------------------
// Structural completion builders.

#[derive(Debug, Clone)]
pub struct GluedCompletion {
    pub matrix: SymmetricMatrix,
    /// First input row -> glued row (identity embedding).
    pub g_map: Vec<usize>,
    /// Second input row -> glued row.
    pub h_map: Vec<usize>,
}

/// Glues two PSD matrices that agree on a shared vertex set: factor both,
/// rotate the second factor so the shared vectors coincide, and read the
/// Gram matrix of the combined vector system. `shared` pairs
/// `(row in mg, row in mh)`; shared rows keep the first input's values.
pub fn glue_clique_sum(
    mg: &SymmetricMatrix,
    mh: &SymmetricMatrix,
    shared: &[(usize, usize)],
    tol: f64,
) -> Result<GluedCompletion, CompletionError> {
    let (ng, nh) = (mg.n(), mh.n());
    let mut seen_g = vec![false; ng];
    let mut seen_h = vec![false; nh];
    for &(gi, hi) in shared {
        if gi >= ng || hi >= nh {
            return Err(CompletionError::BadSharedPairs {
                reason: format!("pair ({gi}, {hi}) out of range"),
            });
        }
        if seen_g[gi] || seen_h[hi] {
            return Err(CompletionError::BadSharedPairs {
                reason: format!("vertex repeated in pair ({gi}, {hi})"),
            });
        }
        seen_g[gi] = true;
        seen_h[hi] = true;
    }
    let scale = 1.0 + mg.frobenius_norm().max(mh.frobenius_norm());
    let mut dev: f64 = 0.0;
    for &(gi, hi) in shared {
        for &(gj, hj) in shared {
            dev = dev.max((mg.get(gi, gj) - mh.get(hi, hj)).abs());
        }
    }
    if dev > tol * scale {
        return Err(CompletionError::SharedBlockMismatch { dev });
    }

    let clamp = GRAM_CLAMP.max(tol);
    let fg = gram_factor(mg, clamp)?;
    let fh = gram_factor(mh, clamp)?;
    let d = ng.max(nh);
    let pad = |f: &crate::numerics::Mat, row: usize| -> Vec<f64> {
        let mut v = vec![0.0; d];
        for c in 0..f.cols() {
            v[c] = f[(row, c)];
        }
        v
    };
    let src: Vec<Vec<f64>> = shared.iter().map(|&(_, hi)| pad(&fh, hi)).collect();
    let dst: Vec<Vec<f64>> = shared.iter().map(|&(gi, _)| pad(&fg, gi)).collect();
    let rot = orthogonal_align(&src, &dst, tol.max(1e-8))?;

    let total = ng + nh - shared.len();
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(total);
    for row in 0..ng {
        vectors.push(pad(&fg, row));
    }
    let g_map: Vec<usize> = (0..ng).collect();
    let mut h_map = vec![usize::MAX; nh];
    for &(gi, hi) in shared {
        h_map[hi] = gi;
    }
    for hi in 0..nh {
        if h_map[hi] == usize::MAX {
            h_map[hi] = vectors.len();
            vectors.push(rot.mul_vec(&pad(&fh, hi)));
        }
    }
    let mut matrix = SymmetricMatrix::zeros(total);
    for p in 0..total {
        for q in p..total {
            let v: f64 = vectors[p].iter().zip(&vectors[q]).map(|(x, y)| x * y).sum();
            matrix.set(p, q, v);
        }
    }
    Ok(GluedCompletion {
        matrix,
        g_map,
        h_map,
    })
}

/// Completes a partial matrix whose pattern is a cone: reduce by the
/// Schur complement at the apex, complete the reduced matrix with
/// `inner`, and lift the result back. A zero apex block-diagonalizes
/// instead.
pub fn cone_completion(
    a: &PartialMatrix,
    apex: usize,
    tol: f64,
    inner: impl FnOnce(&PartialMatrix) -> Result<SymmetricMatrix, CompletionError>,
) -> Result<SymmetricMatrix, CompletionError> {
    use crate::partial::SchurOutcome;
    let n = a.n();
    let outcome = a.schur_complement_cone(apex, tol)?;
    let mut m = SymmetricMatrix::zeros(n);
    m.set(apex, apex, a.diag(apex));
    match outcome {
        SchurOutcome::ZeroApex { reduced, map } => {
            let mq = inner(&reduced)?;
            for i in 0..reduced.n() {
                for j in i..reduced.n() {
                    m.set(map[i], map[j], mq.get(i, j));
                }
            }
        }
        SchurOutcome::Reduced { reduced, map } => {
            let b = a.diag(apex);
            let mq = inner(&reduced)?;
            for i in 0..reduced.n() {
                let ci = a.edge(map[i].min(apex), map[i].max(apex)).unwrap();
                m.set(map[i], apex, ci);
                for j in i..reduced.n() {
                    let cj = a.edge(map[j].min(apex), map[j].max(apex)).unwrap();
                    m.set(map[i], map[j], mq.get(i, j) + ci * cj / b);
                }
            }
        }
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// Hole constraints.

#[derive(Debug, Clone, Serialize)]
pub struct CycleCheck {
    pub satisfied: bool,
    /// First violated hole in cycle order, original labels.
    pub violated_hole: Option<Vec<usize>>,
}

/// Extracts the cycle order of a vertex subset if it induces a chordless
/// cycle of length >= 4.
fn induced_cycle_order(g: &Graph, verts: &[usize]) -> Option<Vec<usize>> {
    if verts.len() < 4 {
        return None;
    }
    let inside = |v: usize| verts.contains(&v);
    for &v in verts {
        if g.neighbors(v).filter(|&w| inside(w)).count() != 2 {
            return None;
        }
    }
    let start = *verts.iter().min().unwrap();
    let first = g.neighbors(start).filter(|&w| inside(w)).min().unwrap();
    let mut order = vec![start, first];
    loop {
        let head = *order.last().unwrap();
        let prev = order[order.len() - 2];
        let next = g.neighbors(head).find(|&w| inside(w) && w != prev).unwrap();
        if next == start {
            break;
        }
        order.push(next);
        if order.len() > verts.len() {
            return None;
        }
    }
    (order.len() == verts.len()).then_some(order)
}

/// Relabels the restriction of `a` to a cycle walk onto the standard cycle
/// pattern.
fn cycle_restriction(a: &PartialMatrix, walk: &[usize]) -> PartialMatrix {
    let k = walk.len();
    let diag: Vec<f64> = walk.iter().map(|&v| a.diag(v)).collect();
    let mut off = vec![];
    for t in 0..k {
        let (u, v) = (walk[t], walk[(t + 1) % k]);
        let val = a.edge(u.min(v), u.max(v)).unwrap();
        let (p, q) = if t + 1 < k { (t, t + 1) } else { (0, k - 1) };
        off.push(((p, q), val));
    }
    PartialMatrix::new(Graph::cycle(k), diag, &off).unwrap()
}

/// Checks that the restriction of `a` to every hole of its pattern is
/// completable: the rank-2 angle test first, the SDP route when the angle
/// test is inconclusive.
pub fn cycle_constraints_satisfied(
    a: &PartialMatrix,
    tol: f64,
) -> Result<CycleCheck, CompletionError> {
    let n = a.n();
    if n > MAX_HOLE_ENUMERATION {
        return Err(CompletionError::PatternTooLarge { n });
    }
    let g = a.graph().clone();
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() < 4 {
            continue;
        }
        let verts: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let walk = match induced_cycle_order(&g, &verts) {
            Some(w) => w,
            None => continue,
        };
        let restriction = cycle_restriction(a, &walk);
        match rank2_cycle_feasible(&restriction, None) {
            Ok(r) if r.feasible => continue,
            // An indefinite edge block rules out any completion.
            Ok(r) if r.residual.is_infinite() => {
                return Ok(CycleCheck {
                    satisfied: false,
                    violated_hole: Some(walk),
                });
            }
            Ok(_) => {}
            Err(CompletionError::Partial(PartialMatrixError::NonpositiveDiagonal { .. })) => {
                return Ok(CycleCheck {
                    satisfied: false,
                    violated_hole: Some(walk),
                });
            }
            Err(e) => return Err(e),
        }
        if !is_psd_completable(&restriction, tol)?.is_completable() {
            return Ok(CycleCheck {
                satisfied: false,
                violated_hole: Some(walk),
            });
        }
    }
    Ok(CycleCheck {
        satisfied: true,
        violated_hole: None,
    })
}
