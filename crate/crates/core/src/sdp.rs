//! Graph-sparse semidefinite programs and a small dense interior-point
//! solver.
//!
//! The engine solves the conic standard form
//!
//! ```text
//!   min  sum_b <C_b, X_b> + c_f' u
//!   s.t. sum_b <A_lb, X_b> + f_l' u = b_l      (l = 1..m)
//!        X_b psd for every block b, u free
//! ```
//!
//! by primal-dual path following with a Nesterov-Todd-style scaling:
//!
//! 1. scaling `W = S^-1/2 (S^1/2 X S^1/2)^1/2 S^-1/2` per block,
//! 2. predictor/corrector directions from the Schur system
//!    `[M F; F' 0] [dy; du] = rhs` with `M_lk = sum_b <A_lb, W A_kb W>`,
//! 3. step to a fixed fraction (0.98) of the cone boundary.
//!
//! Free variables carry the shared entries of the clique-decomposed
//! program, so overlapping blocks reference one variable instead of being
//! tied together by consensus rows. All solves are single threaded and
//! deterministic: fixed initialization, no randomness, fixed sweep orders.
//!
//! Text format (`parse` / `to_text`): header `n k`, then `l i j v` lines
//! with `l = 0` for the objective and `l = 1..k` for constraint matrices
//! (`i <= j`, both mirrored halves set to `v`), one `rhs b_1 .. b_k` line,
//! and an optional `trace 1` line marking the normalization constraint.

use crate::graph::Graph;
use crate::numerics::{sym_eig, Mat, NumericsError, SymmetricMatrix};
use crate::partial::PartialMatrix;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Desk-scale cap on matrix order.
pub const MAX_ORDER: usize = 64;
/// Desk-scale cap on the number of program constraints.
pub const MAX_CONSTRAINTS: usize = 200;
/// Cap on internal rows (program constraints plus block scatter rows).
const MAX_INTERNAL_ROWS: usize = 1024;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("matrix order {n} exceeds the supported maximum {MAX_ORDER}")]
    OrderLimit { n: usize },
    #[error("{k} constraints exceed the supported maximum {MAX_CONSTRAINTS}")]
    ConstraintLimit { k: usize },
    #[error("program needs {rows} internal rows, more than the supported {MAX_INTERNAL_ROWS}")]
    InternalRowLimit { rows: usize },
    #[error("constraint {index} has order {got}, expected {expected}")]
    ShapeMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("program must have at least one variable")]
    EmptyProgram,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Sparse SDP `min <B0, X>` subject to `<Bl, X> = b_l` and `X >= 0`,
/// optionally carrying the trace normalization `tr X = 1` as an extra row.
#[derive(Debug, Clone)]
pub struct SparseSdp {
    n: usize,
    objective: SymmetricMatrix,
    constraints: Vec<(SymmetricMatrix, f64)>,
    trace_normalized: bool,
}

impl SparseSdp {
    pub fn new(
        objective: SymmetricMatrix,
        constraints: Vec<(SymmetricMatrix, f64)>,
        trace_normalized: bool,
    ) -> Result<Self, SdpError> {
        let n = objective.n();
        if n == 0 {
            return Err(SdpError::EmptyProgram);
        }
        if n > MAX_ORDER {
            return Err(SdpError::OrderLimit { n });
        }
        if constraints.len() > MAX_CONSTRAINTS {
            return Err(SdpError::ConstraintLimit {
                k: constraints.len(),
            });
        }
        for (idx, (b, _)) in constraints.iter().enumerate() {
            if b.n() != n {
                return Err(SdpError::ShapeMismatch {
                    index: idx + 1,
                    got: b.n(),
                    expected: n,
                });
            }
        }
        Ok(SparseSdp {
            n,
            objective,
            constraints,
            trace_normalized,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn objective(&self) -> &SymmetricMatrix {
        &self.objective
    }

    pub fn constraints(&self) -> &[(SymmetricMatrix, f64)] {
        &self.constraints
    }

    pub fn trace_normalized(&self) -> bool {
        self.trace_normalized
    }

    /// Aggregate sparsity pattern: `{i, j}` is an edge iff some data matrix
    /// (objective included) has a nonzero there. Exact zeros do not create
    /// edges.
    pub fn sparsity_graph(&self) -> Graph {
        let mut edges = vec![];
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let hit = self.objective.get(i, j) != 0.0
                    || self.constraints.iter().any(|(b, _)| b.get(i, j) != 0.0);
                if hit {
                    edges.push((i, j));
                }
            }
        }
        Graph::with_edges(self.n, &edges).unwrap()
    }

    /// Parses the `n k` / `l i j v` / `rhs ...` / `trace 1` format.
    pub fn parse(text: &str) -> Result<SparseSdp, SdpError> {
        let mut header: Option<(usize, usize)> = None;
        let mut entries: Vec<(usize, usize, usize, f64)> = vec![];
        let mut rhs: Option<Vec<f64>> = None;
        let mut trace = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let err = |msg: String| SdpError::Parse {
                line: lineno + 1,
                msg,
            };
            match header {
                None => {
                    if toks.len() != 2 {
                        return Err(err("expected header `n k`".into()));
                    }
                    let n = toks[0]
                        .parse()
                        .map_err(|_| err(format!("bad integer {:?}", toks[0])))?;
                    let k = toks[1]
                        .parse()
                        .map_err(|_| err(format!("bad integer {:?}", toks[1])))?;
                    header = Some((n, k));
                }
                Some((n, k)) => match toks[0] {
                    "rhs" => {
                        if rhs.is_some() {
                            return Err(err("duplicate rhs line".into()));
                        }
                        if toks.len() != k + 1 {
                            return Err(err(format!(
                                "rhs needs {k} values, found {}",
                                toks.len() - 1
                            )));
                        }
                        let mut vals = vec![];
                        for t in &toks[1..] {
                            vals.push(t.parse().map_err(|_| err(format!("bad value {t:?}")))?);
                        }
                        rhs = Some(vals);
                    }
                    "trace" => {
                        if toks.len() != 2 || toks[1] != "1" {
                            return Err(err("trace line must read `trace 1`".into()));
                        }
                        trace = true;
                    }
                    _ => {
                        if toks.len() != 4 {
                            return Err(err(format!(
                                "expected `l i j v`, found {} fields",
                                toks.len()
                            )));
                        }
                        let l: usize = toks[0]
                            .parse()
                            .map_err(|_| err(format!("bad integer {:?}", toks[0])))?;
                        let i: usize = toks[1]
                            .parse()
                            .map_err(|_| err(format!("bad integer {:?}", toks[1])))?;
                        let j: usize = toks[2]
                            .parse()
                            .map_err(|_| err(format!("bad integer {:?}", toks[2])))?;
                        let v: f64 = toks[3]
                            .parse()
                            .map_err(|_| err(format!("bad value {:?}", toks[3])))?;
                        if l > k {
                            return Err(err(format!("matrix index {l} out of range for k = {k}")));
                        }
                        if i > j {
                            return Err(err(format!("entries must have i <= j, found {i} {j}")));
                        }
                        if j >= n {
                            return Err(err(format!("index out of range for n = {n}")));
                        }
                        if !v.is_finite() {
                            return Err(err("non-finite value".into()));
                        }
                        if entries
                            .iter()
                            .any(|&(l2, i2, j2, _)| (l2, i2, j2) == (l, i, j))
                        {
                            return Err(err(format!(
                                "duplicate entry for matrix {l} at ({i}, {j})"
                            )));
                        }
                        entries.push((l, i, j, v));
                    }
                },
            }
        }
        let (n, k) = header.ok_or(SdpError::Parse {
            line: 0,
            msg: "missing `n k` header".into(),
        })?;
        let rhs = match (rhs, k) {
            (Some(r), _) => r,
            (None, 0) => vec![],
            (None, _) => {
                return Err(SdpError::Parse {
                    line: 0,
                    msg: "missing rhs line".into(),
                })
            }
        };
        let mut mats = vec![SymmetricMatrix::zeros(n); k + 1];
        for (l, i, j, v) in entries {
            mats[l].set(i, j, v);
        }
        let objective = mats.remove(0);
        let constraints = mats.into_iter().zip(rhs).collect();
        SparseSdp::new(objective, constraints, trace)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.constraints.len());
        let emit = |s: &mut String, l: usize, m: &SymmetricMatrix| {
            for i in 0..m.n() {
                for j in i..m.n() {
                    if m.get(i, j) != 0.0 {
                        let _ = writeln!(s, "{l} {i} {j} {}", m.get(i, j));
                    }
                }
            }
        };
        emit(&mut s, 0, &self.objective);
        for (l, (m, _)) in self.constraints.iter().enumerate() {
            emit(&mut s, l + 1, m);
        }
        if !self.constraints.is_empty() {
            s.push_str("rhs");
            for (_, b) in &self.constraints {
                let _ = write!(s, " {b}");
            }
            s.push('\n');
        }
        if self.trace_normalized {
            s.push_str("trace 1\n");
        }
        s
    }
}

/// A sparse SDP together with its sparsity pattern and the maximal-clique
/// blocks used by the relaxed solve.
#[derive(Debug, Clone)]
pub struct DecomposedSdp {
    base: SparseSdp,
    graph: Graph,
    clique_blocks: Vec<Vec<usize>>,
}

impl DecomposedSdp {
    pub fn base(&self) -> &SparseSdp {
        &self.base
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn clique_blocks(&self) -> &[Vec<usize>] {
        &self.clique_blocks
    }
}

/// Splits a program along its sparsity pattern into maximal-clique blocks.
pub fn decompose(s: &SparseSdp) -> DecomposedSdp {
    let graph = s.sparsity_graph();
    let clique_blocks = graph.maximal_cliques();
    DecomposedSdp {
        base: s.clone(),
        graph,
        clique_blocks,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Iteration cap reached before the tolerances were met.
    MaxIter,
    /// The iterates diverged or the constraints were inconsistent; not a
    /// certificate of infeasibility.
    NumericallyInfeasible,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-9,
            max_iter: 200,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions {
            tol,
            ..Default::default()
        }
    }
}

/// Result of a full-cone solve.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub value: f64,
    pub x: SymmetricMatrix,
    /// Multipliers for the program constraints, in input order (the trace
    /// row, when present, is folded in separately).
    pub y: Vec<f64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
}

/// Result of a clique-decomposed solve.
#[derive(Debug, Clone)]
pub struct DecomposedSolution {
    pub status: SolveStatus,
    pub value: f64,
    /// Optimal shared entries as a partial matrix over the sparsity pattern.
    pub entries: PartialMatrix,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
}

/// Two-sided bound `[lower, upper]` around the true optimum recovered from
/// a relaxed value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInterval {
    pub lower: f64,
    pub upper: f64,
}

/// Recovers the bound interval from the relaxed optimum `alpha'`: the true
/// optimum lies in `[alpha', alpha'/(1+n*eps) + eps*trace_b0/(1+n*eps)]`.
/// Requires `eps >= 0`; only valid when `(1/n) I` is feasible for the
/// program, which callers must establish separately.
pub fn bound_gap(
    alpha_prime: f64,
    eps: f64,
    trace_b0: f64,
    n: usize,
) -> Result<BoundInterval, SdpError> {
    if n == 0 {
        return Err(SdpError::EmptyProgram);
    }
    assert!(eps >= 0.0, "negative expansion constant");
    let denom = 1.0 + n as f64 * eps;
    Ok(BoundInterval {
        lower: alpha_prime,
        upper: alpha_prime / denom + eps * trace_b0 / denom,
    })
}

/// Rescaled MAX-CUT relaxation of a graph: minimize `<B0, X>` with
/// `B0 = (n/2) * adjacency` subject to `X_ii = 1/n` and `X >= 0`. The
/// trace normalization is implied by the diagonal constraints, so no
/// separate trace row is added.
pub fn maxcut_sdp(g: &Graph) -> Result<SparseSdp, SdpError> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(SdpError::EmptyProgram);
    }
    let mut b0 = SymmetricMatrix::zeros(n);
    for &(i, j) in g.edges() {
        b0.set(i, j, n as f64 / 2.0);
    }
    let mut constraints = vec![];
    for i in 0..n {
        let mut e = SymmetricMatrix::zeros(n);
        e.set(i, i, 1.0);
        constraints.push((e, 1.0 / n as f64));
    }
    SparseSdp::new(b0, constraints, false)
}

/// Solves the program over the full PSD cone.
pub fn solve(s: &SparseSdp, opts: &SolveOptions) -> Result<SdpSolution, SdpError> {
    let n = s.n;
    let mut rows = vec![];
    if s.trace_normalized {
        rows.push(ConicRow {
            blocks: vec![SymmetricMatrix::identity(n)],
            free: vec![],
            rhs: 1.0,
        });
    }
    for (b, rhs) in &s.constraints {
        rows.push(ConicRow {
            blocks: vec![b.clone()],
            free: vec![],
            rhs: *rhs,
        });
    }
    let prog = ConicProgram {
        block_sizes: vec![n],
        obj_blocks: vec![s.objective.clone()],
        obj_free: vec![],
        rows,
        init_scale: if s.trace_normalized {
            1.0 / n as f64
        } else {
            1.0
        },
    };
    let sol = solve_conic(&prog, opts)?;
    let skip = usize::from(s.trace_normalized);
    Ok(SdpSolution {
        status: sol.status,
        value: sol.pobj,
        x: sol.x_blocks.into_iter().next().unwrap(),
        y: sol.y[skip..].to_vec(),
        iterations: sol.iterations,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
        gap: sol.gap,
    })
}

/// Solves the clique-decomposed relaxation: one PSD block per maximal
/// clique, blocks joined by shared entry variables. The optimum is a lower
/// bound on the full-cone optimum (the feasible set only grows).
pub fn solve_decomposed(
    d: &DecomposedSdp,
    opts: &SolveOptions,
) -> Result<DecomposedSolution, SdpError> {
    let n = d.base.n;
    let g = &d.graph;
    // Shared variables: one per diagonal entry, one per pattern edge.
    let mut entry_index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for i in 0..n {
        entry_index.insert((i, i), i);
    }
    for (k, &(i, j)) in g.edges().iter().enumerate() {
        entry_index.insert((i, j), n + k);
    }
    let nf = entry_index.len();
    let nb = d.clique_blocks.len();

    // Reads a data matrix into free-variable coefficients: diagonal entries
    // once, off-diagonal entries twice (both halves of <B, X>).
    let to_free = |m: &SymmetricMatrix| -> Result<Vec<f64>, SdpError> {
        let mut c = vec![0.0; nf];
        for i in 0..n {
            c[i] = m.get(i, i);
            for j in (i + 1)..n {
                let v = m.get(i, j);
                if v != 0.0 {
                    // The sparsity graph contains every structural nonzero.
                    let idx = entry_index[&(i, j)];
                    c[idx] = 2.0 * v;
                }
            }
        }
        Ok(c)
    };

    let mut rows = vec![];
    // Scatter rows tie each block entry to its shared variable.
    for (bi, clique) in d.clique_blocks.iter().enumerate() {
        let t = clique.len();
        for p in 0..t {
            for q in p..t {
                let mut blocks = vec![SymmetricMatrix::zeros(0); nb];
                let mut e = SymmetricMatrix::zeros(t);
                e.set(p, q, if p == q { 1.0 } else { 0.5 });
                blocks[bi] = e;
                let mut free = vec![0.0; nf];
                let (u, v) = (clique[p].min(clique[q]), clique[p].max(clique[q]));
                free[entry_index[&(u, v)]] = -1.0;
                rows.push(ConicRow {
                    blocks,
                    free,
                    rhs: 0.0,
                });
            }
        }
    }
    if d.base.trace_normalized {
        let mut free = vec![0.0; nf];
        for i in 0..n {
            free[i] = 1.0;
        }
        rows.push(ConicRow {
            blocks: vec![SymmetricMatrix::zeros(0); nb],
            free,
            rhs: 1.0,
        });
    }
    for (b, rhs) in &d.base.constraints {
        rows.push(ConicRow {
            blocks: vec![SymmetricMatrix::zeros(0); nb],
            free: to_free(b)?,
            rhs: *rhs,
        });
    }
    // Zero-size placeholders become real zero matrices of the block size.
    let block_sizes: Vec<usize> = d.clique_blocks.iter().map(Vec::len).collect();
    for row in &mut rows {
        for (bi, m) in row.blocks.iter_mut().enumerate() {
            if m.n() != block_sizes[bi] {
                *m = SymmetricMatrix::zeros(block_sizes[bi]);
            }
        }
    }
    let prog = ConicProgram {
        block_sizes,
        obj_blocks: d
            .clique_blocks
            .iter()
            .map(|c| SymmetricMatrix::zeros(c.len()))
            .collect(),
        obj_free: to_free(&d.base.objective)?,
        rows,
        init_scale: 1.0 / n.max(1) as f64,
    };
    let sol = solve_conic(&prog, opts)?;
    let diag: Vec<f64> = (0..n).map(|i| sol.u[i]).collect();
    let off: Vec<_> = g
        .edges()
        .iter()
        .map(|&(i, j)| ((i, j), sol.u[entry_index[&(i, j)]]))
        .collect();
    let entries =
        PartialMatrix::new(g.clone(), diag, &off).expect("pattern covered by construction");
    Ok(DecomposedSolution {
        status: sol.status,
        value: sol.pobj,
        entries,
        iterations: sol.iterations,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
        gap: sol.gap,
    })
}

// ---------------------------------------------------------------------------
// Conic engine.

#[derive(Debug, Clone)]
pub(crate) struct ConicRow {
    pub blocks: Vec<SymmetricMatrix>,
    pub free: Vec<f64>,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct ConicProgram {
    pub block_sizes: Vec<usize>,
    pub obj_blocks: Vec<SymmetricMatrix>,
    pub obj_free: Vec<f64>,
    pub rows: Vec<ConicRow>,
    /// Initial `X = S = init_scale * I`; trace-normalized programs pass
    /// `1/n` so the start satisfies the normalization.
    pub init_scale: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct ConicSolution {
    pub status: SolveStatus,
    pub x_blocks: Vec<SymmetricMatrix>,
    pub s_blocks: Vec<SymmetricMatrix>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub pobj: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

/// Fraction of the distance to the cone boundary taken each step.
const STEP_FRACTION: f64 = 0.98;
/// Relative tolerance for dropping linearly dependent rows in presolve.
const DEPENDENCY_TOL: f64 = 1e-10;

struct BlockVec(Vec<SymmetricMatrix>);

impl BlockVec {
    fn zeros(sizes: &[usize]) -> Self {
        BlockVec(sizes.iter().map(|&s| SymmetricMatrix::zeros(s)).collect())
    }

    fn is_finite(&self) -> bool {
        self.0
            .iter()
            .all(|b| b.data().iter().all(|v| v.is_finite()))
    }

    fn inner(&self, other: &BlockVec) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.inner(b)).sum()
    }

    fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    fn axpy(&mut self, alpha: f64, other: &BlockVec) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a = a.add(&b.scaled(alpha));
        }
    }
}

fn row_inner(row: &ConicRow, x: &BlockVec, u: &[f64]) -> f64 {
    let mut acc: f64 = row.blocks.iter().zip(&x.0).map(|(a, b)| a.inner(b)).sum();
    for (f, uv) in row.free.iter().zip(u) {
        acc += f * uv;
    }
    acc
}

/// Lower-triangular Cholesky factor, or `None` if the matrix is not
/// numerically positive definite.
fn cholesky(m: &Mat) -> Option<Mat> {
    let n = m.rows();
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = m[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[(i, i)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Some(l)
}

fn chol_solve(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let t = l[(i, k)] * y[k];
            y[i] -= t;
        }
        y[i] /= l[(i, i)];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let t = l[(k, i)] * y[k];
            y[i] -= t;
        }
        y[i] /= l[(i, i)];
    }
    y
}

/// `Q f(diag) Q^T` for a spectral function `f`.
fn spectral_map(
    m: &SymmetricMatrix,
    f: impl Fn(f64) -> f64,
) -> Result<SymmetricMatrix, NumericsError> {
    let eig = sym_eig(m)?;
    let n = m.n();
    let mut out = SymmetricMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += eig.vectors[(i, k)] * f(eig.values[k]) * eig.vectors[(j, k)];
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

fn sym_product(a: &SymmetricMatrix, b: &SymmetricMatrix, c: &SymmetricMatrix) -> SymmetricMatrix {
    let p = a.to_mat().mul(&b.to_mat()).mul(&c.to_mat());
    let n = p.rows();
    let mut out = SymmetricMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            out.set(i, j, 0.5 * (p[(i, j)] + p[(j, i)]));
        }
    }
    out
}

/// Largest step `alpha` with `p + alpha d` still PSD, as a multiple of 1;
/// `f64::INFINITY` when the direction never leaves the cone.
fn max_step(p: &SymmetricMatrix, d: &SymmetricMatrix) -> Result<f64, NumericsError> {
    if p.n() == 0 {
        return Ok(f64::INFINITY);
    }
    let inv_half = spectral_map(p, |l| 1.0 / l.max(1e-300).sqrt())?;
    let scaled = sym_product(&inv_half, d, &inv_half);
    let lam = sym_eig(&scaled)?.min();
    if lam >= -1e-14 {
        Ok(f64::INFINITY)
    } else {
        Ok(-1.0 / lam)
    }
}

/// Presolve: drops rows that are linear combinations of earlier rows.
/// Returns the kept indices, or `None` when a dependent row has an
/// inconsistent right-hand side.
fn independent_rows(rows: &[ConicRow], nf: usize) -> Option<Vec<usize>> {
    let dim: usize = rows
        .first()
        .map(|r| r.blocks.iter().map(|b| b.n() * b.n()).sum::<usize>() + nf)
        .unwrap_or(nf);
    let svec = |row: &ConicRow| -> Vec<f64> {
        let mut v = Vec::with_capacity(dim);
        for b in &row.blocks {
            v.extend_from_slice(b.data());
        }
        v.extend_from_slice(&row.free);
        v
    };
    let mut basis: Vec<(Vec<f64>, f64)> = vec![];
    let mut kept = vec![];
    let rhs_scale = 1.0 + rows.iter().fold(0.0f64, |a, r| a.max(r.rhs.abs()));
    for (idx, row) in rows.iter().enumerate() {
        let mut v = svec(row);
        let mut r = row.rhs;
        let orig: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (bv, br) in &basis {
            let coef: f64 = v.iter().zip(bv).map(|(a, b)| a * b).sum();
            for (a, b) in v.iter_mut().zip(bv) {
                *a -= coef * b;
            }
            r -= coef * br;
        }
        let left: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if left <= DEPENDENCY_TOL * (1.0 + orig) {
            if r.abs() > 1e-8 * rhs_scale {
                return None;
            }
            continue;
        }
        for x in &mut v {
            *x /= left;
        }
        basis.push((v, r / left));
        kept.push(idx);
    }
    Some(kept)
}

pub(crate) fn solve_conic(
    prog: &ConicProgram,
    opts: &SolveOptions,
) -> Result<ConicSolution, SdpError> {
    let nb = prog.block_sizes.len();
    let nf = prog.obj_free.len();
    let total_dim: usize = prog.block_sizes.iter().sum();
    if total_dim == 0 && nf == 0 {
        return Err(SdpError::EmptyProgram);
    }
    if prog.rows.len() > MAX_INTERNAL_ROWS {
        return Err(SdpError::InternalRowLimit {
            rows: prog.rows.len(),
        });
    }
    for row in &prog.rows {
        debug_assert_eq!(row.blocks.len(), nb);
        debug_assert_eq!(row.free.len(), nf);
    }

    let kept = match independent_rows(&prog.rows, nf) {
        Some(k) => k,
        None => {
            // Inconsistent equalities: report without iterating.
            return Ok(ConicSolution {
                status: SolveStatus::NumericallyInfeasible,
                x_blocks: prog
                    .block_sizes
                    .iter()
                    .map(|&s| SymmetricMatrix::identity(s))
                    .collect(),
                s_blocks: prog
                    .block_sizes
                    .iter()
                    .map(|&s| SymmetricMatrix::identity(s))
                    .collect(),
                y: vec![0.0; prog.rows.len()],
                u: vec![0.0; nf],
                pobj: f64::NAN,
                gap: f64::INFINITY,
                primal_residual: f64::INFINITY,
                dual_residual: f64::INFINITY,
                iterations: 0,
            });
        }
    };
    let rows: Vec<&ConicRow> = kept.iter().map(|&i| &prog.rows[i]).collect();
    let m = rows.len();

    let mut x = BlockVec(
        prog.block_sizes
            .iter()
            .map(|&s| SymmetricMatrix::identity(s).scaled(prog.init_scale))
            .collect(),
    );
    let mut s = BlockVec(
        prog.block_sizes
            .iter()
            .map(|&s| SymmetricMatrix::identity(s))
            .collect(),
    );
    let mut y = vec![0.0; m];
    let mut u = vec![0.0; nf];

    let b_norm = 1.0 + rows.iter().map(|r| r.rhs * r.rhs).sum::<f64>().sqrt();
    let c_norm = {
        let blocks: f64 = prog.obj_blocks.iter().map(|b| b.inner(b)).sum();
        let free: f64 = prog.obj_free.iter().map(|x| x * x).sum();
        1.0 + (blocks + free).sqrt()
    };

    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;
    // Best iterate by worst normalized residual; late iterations can churn
    // once the Schur system turns ill-conditioned, so the best one wins.
    let mut best_merit = f64::INFINITY;
    let mut snapshot: Option<(BlockVec, BlockVec, Vec<f64>, Vec<f64>, (f64, f64, f64))> = None;

    for iter in 0..opts.max_iter {
        iterations = iter;
        // Residuals.
        let rp: Vec<f64> = rows.iter().map(|r| r.rhs - row_inner(r, &x, &u)).collect();
        let mut rd = BlockVec::zeros(&prog.block_sizes);
        for (bi, c) in prog.obj_blocks.iter().enumerate() {
            rd.0[bi] = c.add(&s.0[bi].scaled(-1.0));
        }
        for (l, row) in rows.iter().enumerate() {
            if y[l] != 0.0 {
                for (bi, a) in row.blocks.iter().enumerate() {
                    rd.0[bi] = rd.0[bi].add(&a.scaled(-y[l]));
                }
            }
        }
        let rf: Vec<f64> = (0..nf)
            .map(|e| {
                prog.obj_free[e]
                    - rows
                        .iter()
                        .enumerate()
                        .map(|(l, r)| y[l] * r.free[e])
                        .sum::<f64>()
            })
            .collect();
        let rp_norm = rp.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rd_norm = (rd.norm().powi(2) + rf.iter().map(|v| v * v).sum::<f64>()).sqrt();

        let pobj = prog
            .obj_blocks
            .iter()
            .zip(&x.0)
            .map(|(c, xb)| c.inner(xb))
            .sum::<f64>()
            + prog
                .obj_free
                .iter()
                .zip(&u)
                .map(|(c, uv)| c * uv)
                .sum::<f64>();
        let dobj: f64 = rows.iter().enumerate().map(|(l, r)| y[l] * r.rhs).sum();
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());

        let merit = (rp_norm / b_norm).max(rd_norm / c_norm).max(gap);
        if merit < best_merit {
            best_merit = merit;
            snapshot = Some((
                BlockVec(x.0.clone()),
                BlockVec(s.0.clone()),
                y.clone(),
                u.clone(),
                (rp_norm, rd_norm, gap),
            ));
        }
        let mu = if total_dim > 0 {
            x.inner(&s) / total_dim as f64
        } else {
            0.0
        };
        if std::env::var_os("CONEDIST_IPM_TRACE").is_some() {
            eprintln!(
                "iter {iter}: mu={mu:.3e} rp={rp_norm:.3e} rd={rd_norm:.3e} gap={gap:.3e} \
                 pobj={pobj:.9e} dobj={dobj:.9e}"
            );
        }
        if merit <= opts.tol {
            status = SolveStatus::Optimal;
            break;
        }
        // Divergence heuristic: unbounded dual objective with a feasible
        // dual trail means the primal is (numerically) infeasible.
        let iterate_scale = x.norm() + s.norm() + y.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if !iterate_scale.is_finite() || iterate_scale > 1e14 || dobj.abs() > 1e14 {
            status = SolveStatus::NumericallyInfeasible;
            break;
        }

        // Scaling W per block.
        let mut w = Vec::with_capacity(nb);
        let mut s_inv = Vec::with_capacity(nb);
        let mut scaling_ok = true;
        for bi in 0..nb {
            if prog.block_sizes[bi] == 0 {
                w.push(SymmetricMatrix::zeros(0));
                s_inv.push(SymmetricMatrix::zeros(0));
                continue;
            }
            let s_half = spectral_map(&s.0[bi], |l| l.max(1e-300).sqrt());
            let s_inv_half = spectral_map(&s.0[bi], |l| 1.0 / l.max(1e-300).sqrt());
            let (s_half, s_inv_half) = match (s_half, s_inv_half) {
                (Ok(a), Ok(b)) => (a, b),
                _ => {
                    scaling_ok = false;
                    break;
                }
            };
            let t = sym_product(&s_half, &x.0[bi], &s_half);
            let t_half = match spectral_map(&t, |l| l.max(0.0).sqrt()) {
                Ok(v) => v,
                Err(_) => {
                    scaling_ok = false;
                    break;
                }
            };
            w.push(sym_product(&s_inv_half, &t_half, &s_inv_half));
            match spectral_map(&s.0[bi], |l| 1.0 / l.max(1e-300)) {
                Ok(v) => s_inv.push(v),
                Err(_) => {
                    scaling_ok = false;
                    break;
                }
            }
        }
        if !scaling_ok {
            break;
        }

        // Schur complement M_lk = sum_b <A_lb, W A_kb W>.
        let v_rows: Vec<BlockVec> = rows
            .iter()
            .map(|r| {
                BlockVec(
                    r.blocks
                        .iter()
                        .enumerate()
                        .map(|(bi, a)| {
                            if a.n() == 0 {
                                SymmetricMatrix::zeros(0)
                            } else {
                                sym_product(&w[bi], a, &w[bi])
                            }
                        })
                        .collect(),
                )
            })
            .collect();
        let mut schur = Mat::zeros(m, m);
        for l in 0..m {
            for k in l..m {
                let val: f64 = rows[l]
                    .blocks
                    .iter()
                    .zip(&v_rows[k].0)
                    .map(|(a, v)| a.inner(v))
                    .sum();
                schur[(l, k)] = val;
                schur[(k, l)] = val;
            }
        }
        let chol = {
            let mut attempt = cholesky(&schur);
            if attempt.is_none() {
                let jitter = 1e-12 * (1.0 + (0..m).map(|i| schur[(i, i)]).fold(0.0f64, f64::max));
                let mut j = schur.clone();
                for i in 0..m {
                    j[(i, i)] += jitter;
                }
                attempt = cholesky(&j);
            }
            match attempt {
                Some(l) => l,
                None => break,
            }
        };

        // Free-variable elimination: G = F' M^-1 F.
        let fmat: Vec<Vec<f64>> = (0..nf)
            .map(|e| rows.iter().map(|r| r.free[e]).collect())
            .collect();
        let z_cols: Vec<Vec<f64>> = fmat.iter().map(|col| chol_solve(&chol, col)).collect();
        let g_chol = if nf > 0 {
            let mut g = Mat::zeros(nf, nf);
            for a in 0..nf {
                for b in a..nf {
                    let v: f64 = fmat[a].iter().zip(&z_cols[b]).map(|(p, q)| p * q).sum();
                    g[(a, b)] = v;
                    g[(b, a)] = v;
                }
            }
            match cholesky(&g) {
                Some(l) => Some(l),
                None => break,
            }
        } else {
            None
        };

        // Saddle solve [M F; F' 0] [dy; du] = [g; h] by block elimination,
        // reusing the factorizations.
        let saddle_solve = |g_vec: &[f64], h_vec: &[f64]| -> (Vec<f64>, Vec<f64>) {
            let wv = chol_solve(&chol, g_vec);
            let du: Vec<f64> = if nf > 0 {
                let t: Vec<f64> = (0..nf)
                    .map(|e| fmat[e].iter().zip(&wv).map(|(p, q)| p * q).sum::<f64>() - h_vec[e])
                    .collect();
                chol_solve(g_chol.as_ref().unwrap(), &t)
            } else {
                vec![]
            };
            let mut dy = wv;
            for (e, z) in z_cols.iter().enumerate() {
                for (l, zv) in z.iter().enumerate() {
                    dy[l] -= du[e] * zv;
                }
            }
            (dy, du)
        };

        // Shared direction solve for a given centering target.
        let solve_direction = |rc: &BlockVec| -> (Vec<f64>, Vec<f64>, BlockVec, BlockVec) {
            // g_l = rp_l - sum_b <A_lb, Rc_b - W Rd_b W>.
            let mut rhs = vec![0.0; m];
            let wrdw: Vec<SymmetricMatrix> = (0..nb)
                .map(|bi| {
                    if prog.block_sizes[bi] == 0 {
                        SymmetricMatrix::zeros(0)
                    } else {
                        sym_product(&w[bi], &rd.0[bi], &w[bi])
                    }
                })
                .collect();
            for (l, row) in rows.iter().enumerate() {
                let mut acc = rp[l];
                for (bi, a) in row.blocks.iter().enumerate() {
                    acc -= a.inner(&rc.0[bi]) - a.inner(&wrdw[bi]);
                }
                rhs[l] = acc;
            }
            let (mut dy, mut du) = saddle_solve(&rhs, &rf);
            // Iterative refinement: the Schur system conditioning grows like
            // 1/mu^2, and uncorrected solve error drifts into the equality
            // residuals late in the run.
            for _ in 0..2 {
                let mut res_y = vec![0.0; m];
                for l in 0..m {
                    let mut acc = rhs[l];
                    for k in 0..m {
                        acc -= schur[(l, k)] * dy[k];
                    }
                    for (e, col) in fmat.iter().enumerate() {
                        acc -= col[l] * du[e];
                    }
                    res_y[l] = acc;
                }
                let res_u: Vec<f64> = (0..nf)
                    .map(|e| rf[e] - fmat[e].iter().zip(&dy).map(|(p, q)| p * q).sum::<f64>())
                    .collect();
                let (ey, eu) = saddle_solve(&res_y, &res_u);
                for (l, v) in ey.iter().enumerate() {
                    dy[l] += v;
                }
                for (e, v) in eu.iter().enumerate() {
                    du[e] += v;
                }
            }
            // dS = Rd - A*(dy); dX = Rc - W dS W.
            let mut ds = BlockVec(rd.0.clone());
            for (l, row) in rows.iter().enumerate() {
                if dy[l] != 0.0 {
                    for (bi, a) in row.blocks.iter().enumerate() {
                        ds.0[bi] = ds.0[bi].add(&a.scaled(-dy[l]));
                    }
                }
            }
            let mut dx = BlockVec(rc.0.clone());
            for bi in 0..nb {
                if prog.block_sizes[bi] > 0 {
                    dx.0[bi] = dx.0[bi].add(&sym_product(&w[bi], &ds.0[bi], &w[bi]).scaled(-1.0));
                }
            }
            (dy, du, dx, ds)
        };

        // Predictor: pure Newton toward the boundary.
        let rc_aff = BlockVec(x.0.iter().map(|xb| xb.scaled(-1.0)).collect());
        let (_, _, dx_aff, ds_aff) = solve_direction(&rc_aff);
        // A singular Schur system near the boundary yields NaN directions;
        // stop on the last sound iterate instead of feeding them onward.
        if !dx_aff.is_finite() || !ds_aff.is_finite() {
            break;
        }
        let step_block = |p: &BlockVec, d: &BlockVec| -> Result<f64, NumericsError> {
            let mut a = f64::INFINITY;
            for (pb, db) in p.0.iter().zip(&d.0) {
                a = a.min(max_step(pb, db)?);
            }
            Ok(a)
        };
        let ap_aff = step_block(&x, &dx_aff)?.min(1.0);
        let ad_aff = step_block(&s, &ds_aff)?.min(1.0);
        let gap_aff = {
            let mut xa = BlockVec(x.0.clone());
            xa.axpy(ap_aff, &dx_aff);
            let mut sa = BlockVec(s.0.clone());
            sa.axpy(ad_aff, &ds_aff);
            xa.inner(&sa).max(0.0)
        };
        let sigma = if mu > 0.0 {
            (gap_aff / (mu * total_dim.max(1) as f64))
                .powi(3)
                .clamp(1e-10, 1.0)
        } else {
            0.1
        };

        // Corrector with centering sigma * mu.
        let rc = BlockVec(
            (0..nb)
                .map(|bi| {
                    if prog.block_sizes[bi] == 0 {
                        SymmetricMatrix::zeros(0)
                    } else {
                        s_inv[bi].scaled(sigma * mu).add(&x.0[bi].scaled(-1.0))
                    }
                })
                .collect(),
        );
        let (dy, du, dx, ds) = solve_direction(&rc);
        if !dx.is_finite()
            || !ds.is_finite()
            || dy.iter().any(|v| !v.is_finite())
            || du.iter().any(|v| !v.is_finite())
        {
            break;
        }
        let ap = (STEP_FRACTION * step_block(&x, &dx)?).min(1.0);
        let ad = (STEP_FRACTION * step_block(&s, &ds)?).min(1.0);
        if std::env::var_os("CONEDIST_IPM_TRACE").is_some() {
            eprintln!("        sigma={sigma:.3e} ap={ap:.3e} ad={ad:.3e}");
        }
        if !ap.is_finite() || !ad.is_finite() || ap <= 1e-14 || ad <= 1e-14 {
            break;
        }
        x.axpy(ap, &dx);
        s.axpy(ad, &ds);
        for (l, d) in dy.iter().enumerate() {
            y[l] += ad * d;
        }
        for (e, d) in du.iter().enumerate() {
            u[e] += ap * d;
        }
        iterations = iter + 1;
    }

    let (x, s, y, u, residuals) = match snapshot {
        Some((bx, bs, by, bu, r)) => (bx, bs, by, bu, r),
        None => (x, s, y, u, (f64::INFINITY, f64::INFINITY, f64::INFINITY)),
    };

    // Stalled far from feasibility with a tiny barrier: the equalities are
    // numerically unattainable.
    if status == SolveStatus::MaxIter {
        let mu = if total_dim > 0 {
            x.inner(&s) / total_dim as f64
        } else {
            0.0
        };
        if residuals.0 > 1e3 * opts.tol * b_norm && mu < opts.tol {
            status = SolveStatus::NumericallyInfeasible;
        }
    }

    let pobj = prog
        .obj_blocks
        .iter()
        .zip(&x.0)
        .map(|(c, xb)| c.inner(xb))
        .sum::<f64>()
        + prog
            .obj_free
            .iter()
            .zip(&u)
            .map(|(c, uv)| c * uv)
            .sum::<f64>();

    // Re-expand multipliers over dropped rows.
    let mut y_full = vec![0.0; prog.rows.len()];
    for (slot, &orig) in kept.iter().enumerate() {
        y_full[orig] = y[slot];
    }

    Ok(ConicSolution {
        status,
        x_blocks: x.0,
        s_blocks: s.0,
        y: y_full,
        u,
        pobj,
        gap: residuals.2,
        primal_residual: residuals.0,
        dual_residual: residuals.1,
        iterations,
    })
}
