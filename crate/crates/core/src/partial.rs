//! Partially specified symmetric matrices over a graph sparsity pattern.
//!
//! A [`PartialMatrix`] stores one value per vertex (diagonal) and one per
//! edge; all other entries are unspecified. The module provides:
//!
//! 1. projection of a full symmetric matrix onto a pattern,
//! 2. restriction to induced subgraphs and full clique blocks,
//! 3. the partial positivity test (every maximal-clique block PSD),
//! 4. diagonal +/-1 conjugation bringing a cycle matrix into a sign normal
//!    form with at most one negative off-diagonal entry,
//! 5. the Schur complement reduction that removes a universal apex vertex.
//!
//! Text format: first line `n`, then one `i j value` line per specified
//! entry with `i <= j` (diagonal when `i == j`). Every diagonal index and
//! every edge must appear exactly once. `#` starts a comment.

use crate::graph::{Graph, GraphError};
use crate::numerics::{sym_eig, SymmetricMatrix};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Default eigenvalue tolerance for partial positivity checks.
pub const PARTIAL_POSITIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum PartialMatrixError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("diagonal has {got} entries, expected {expected}")]
    DiagLen { got: usize, expected: usize },
    #[error("entry {{{i}, {j}}} is not an edge of the pattern")]
    NotAnEdge { i: usize, j: usize },
    #[error("edge {{{i}, {j}}} has no value")]
    MissingEdge { i: usize, j: usize },
    #[error("duplicate value for entry {{{i}, {j}}}")]
    DuplicateEntry { i: usize, j: usize },
    #[error("non-finite value at entry {{{i}, {j}}}")]
    NotFinite { i: usize, j: usize },
    #[error("pattern is not the standard cycle 0-1-...-(n-1)-0")]
    NotCycle,
    #[error("cycle has a nonpositive diagonal entry at vertex {v}")]
    NonpositiveDiagonal { v: usize },
    #[error("vertex {apex} is not adjacent to every other vertex")]
    ApexNotUniversal { apex: usize },
    #[error("apex diagonal {b:.6e} is negative beyond tolerance")]
    NegativeApex { b: f64 },
    #[error("apex diagonal is zero but apex row has entry {c:.6e} at vertex {v}")]
    ZeroApexCoupling { v: usize, c: f64 },
    #[error("{verts:?} is not a clique of the pattern")]
    NotAClique { verts: Vec<usize> },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Verdict of the partial positivity test.
#[derive(Debug, Clone, PartialEq)]
pub enum PartialPositivity {
    Positive,
    /// Lexicographically smallest maximal clique whose block fails, with
    /// the offending eigenvalue.
    Violation {
        clique: Vec<usize>,
        lambda_min: f64,
    },
}

impl PartialPositivity {
    pub fn is_positive(&self) -> bool {
        matches!(self, PartialPositivity::Positive)
    }
}

/// Outcome of the apex Schur complement reduction.
#[derive(Debug, Clone)]
pub enum SchurOutcome {
    /// Apex diagonal was positive; contains `Q - c c^T / b` projected onto
    /// the remaining pattern.
    Reduced {
        reduced: PartialMatrix,
        map: Vec<usize>,
    },
    /// Apex diagonal and coupling row were both zero: the reduction is the
    /// unmodified remainder.
    ZeroApex {
        reduced: PartialMatrix,
        map: Vec<usize>,
    },
}

impl SchurOutcome {
    pub fn reduced(&self) -> &PartialMatrix {
        match self {
            SchurOutcome::Reduced { reduced, .. } | SchurOutcome::ZeroApex { reduced, .. } => {
                reduced
            }
        }
    }

    pub fn map(&self) -> &[usize] {
        match self {
            SchurOutcome::Reduced { map, .. } | SchurOutcome::ZeroApex { map, .. } => map,
        }
    }

    pub fn is_zero_apex(&self) -> bool {
        matches!(self, SchurOutcome::ZeroApex { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialMatrix {
    graph: Graph,
    diag: Vec<f64>,
    off: BTreeMap<(usize, usize), f64>,
}

impl PartialMatrix {
    /// Builds from a pattern, a diagonal, and one value per edge. The edge
    /// list must cover the pattern exactly (either orientation accepted).
    pub fn new(
        graph: Graph,
        diag: Vec<f64>,
        off: &[((usize, usize), f64)],
    ) -> Result<Self, PartialMatrixError> {
        let n = graph.vertex_count();
        if diag.len() != n {
            return Err(PartialMatrixError::DiagLen {
                got: diag.len(),
                expected: n,
            });
        }
        for (i, v) in diag.iter().enumerate() {
            if !v.is_finite() {
                return Err(PartialMatrixError::NotFinite { i, j: i });
            }
        }
        let mut map = BTreeMap::new();
        for &((u, v), val) in off {
            let (i, j) = (u.min(v), u.max(v));
            if !graph.has_edge(i, j) {
                return Err(PartialMatrixError::NotAnEdge { i, j });
            }
            if !val.is_finite() {
                return Err(PartialMatrixError::NotFinite { i, j });
            }
            if map.insert((i, j), val).is_some() {
                return Err(PartialMatrixError::DuplicateEntry { i, j });
            }
        }
        for &(i, j) in graph.edges() {
            if !map.contains_key(&(i, j)) {
                return Err(PartialMatrixError::MissingEdge { i, j });
            }
        }
        Ok(PartialMatrix {
            graph,
            diag,
            off: map,
        })
    }

    /// All-zero partial matrix over a pattern.
    pub fn zeros(graph: Graph) -> Self {
        let off: Vec<_> = graph.edges().iter().map(|&e| (e, 0.0)).collect();
        let diag = vec![0.0; graph.vertex_count()];
        PartialMatrix::new(graph, diag, &off).unwrap()
    }

    /// Projection of a full symmetric matrix onto the pattern.
    pub fn project(m: &SymmetricMatrix, graph: &Graph) -> Self {
        let n = graph.vertex_count();
        assert_eq!(m.n(), n, "matrix and pattern sizes differ");
        let diag: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
        let off: Vec<_> = graph
            .edges()
            .iter()
            .map(|&(i, j)| ((i, j), m.get(i, j)))
            .collect();
        PartialMatrix::new(graph.clone(), diag, &off).unwrap()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.diag[i]
    }

    pub fn edge(&self, u: usize, v: usize) -> Option<f64> {
        self.off.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn set_diag(&mut self, i: usize, v: f64) {
        self.diag[i] = v;
    }

    /// Panics when `{u, v}` is not an edge of the pattern.
    pub fn set_edge(&mut self, u: usize, v: usize, val: f64) {
        let key = (u.min(v), u.max(v));
        assert!(self.off.contains_key(&key), "{{{u}, {v}}} not an edge");
        self.off.insert(key, val);
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    /// Specified entries: diagonal as `(i, i, v)` then edges as `(i, j, v)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let d = self.diag.iter().enumerate().map(|(i, &v)| (i, i, v));
        let o = self.off.iter().map(|(&(i, j), &v)| (i, j, v));
        d.chain(o)
    }

    /// Full matrix with unspecified entries set to zero.
    pub fn to_full_zero_filled(&self) -> SymmetricMatrix {
        let mut m = SymmetricMatrix::zeros(self.n());
        for (i, j, v) in self.entries() {
            m.set(i, j, v);
        }
        m
    }

    /// `self + shift * I` on the same pattern.
    pub fn shifted(&self, shift: f64) -> PartialMatrix {
        let mut out = self.clone();
        for d in &mut out.diag {
            *d += shift;
        }
        out
    }

    pub fn scaled(&self, s: f64) -> PartialMatrix {
        let mut out = self.clone();
        for d in &mut out.diag {
            *d *= s;
        }
        for v in out.off.values_mut() {
            *v *= s;
        }
        out
    }

    /// Frobenius inner product with a full symmetric matrix, reading only
    /// specified entries (off-diagonal entries count twice).
    pub fn inner_full(&self, m: &SymmetricMatrix) -> f64 {
        assert_eq!(m.n(), self.n());
        let mut acc = 0.0;
        for (i, j, v) in self.entries() {
            acc += if i == j {
                v * m.get(i, i)
            } else {
                2.0 * v * m.get(i, j)
            };
        }
        acc
    }

    /// Restriction to the induced pattern on `verts`; returns the restricted
    /// matrix and the map from new index to original vertex.
    pub fn restrict(
        &self,
        verts: &[usize],
    ) -> Result<(PartialMatrix, Vec<usize>), PartialMatrixError> {
        let (sub, map) = self.graph.induced_subgraph(verts)?;
        let diag: Vec<f64> = map.iter().map(|&v| self.diag[v]).collect();
        let off: Vec<_> = sub
            .edges()
            .iter()
            .map(|&(i, j)| ((i, j), self.edge(map[i], map[j]).unwrap()))
            .collect();
        Ok((PartialMatrix::new(sub, diag, &off)?, map))
    }

    /// Full principal submatrix on a clique (every pair specified).
    pub fn clique_block(&self, clique: &[usize]) -> Result<SymmetricMatrix, PartialMatrixError> {
        if !self.graph.is_clique(clique) {
            return Err(PartialMatrixError::NotAClique {
                verts: clique.to_vec(),
            });
        }
        let k = clique.len();
        let mut m = SymmetricMatrix::zeros(k);
        for a in 0..k {
            m.set(a, a, self.diag[clique[a]]);
            for b in (a + 1)..k {
                m.set(a, b, self.edge(clique[a], clique[b]).unwrap());
            }
        }
        Ok(m)
    }

    /// Checks that every maximal-clique block has `lambda_min >= -tol`.
    /// Cliques are scanned in lexicographic order, so a reported violation
    /// is the lexicographically smallest offender.
    pub fn is_partially_positive(&self, tol: f64) -> PartialPositivity {
        for clique in self.graph.maximal_cliques() {
            let block = self
                .clique_block(&clique)
                .expect("maximal clique is a clique");
            let lam = sym_eig(&block)
                .expect("clique block eigendecomposition")
                .min();
            if lam < -tol {
                return PartialPositivity::Violation {
                    clique,
                    lambda_min: lam,
                };
            }
        }
        PartialPositivity::Positive
    }

    /// Smallest clique-block eigenvalue over all maximal cliques.
    pub fn min_clique_eigenvalue(&self) -> f64 {
        self.graph
            .maximal_cliques()
            .iter()
            .map(|c| sym_eig(&self.clique_block(c).unwrap()).unwrap().min())
            .fold(f64::INFINITY, f64::min)
    }

    /// Diagonal +/-1 conjugation `b = D a D` minimizing the number of
    /// negative off-diagonal entries of a cycle matrix.
    ///
    /// The result has zero negative entries when the product of edge signs
    /// is positive or any edge entry is zero (zeros absorb either sign);
    /// otherwise exactly one, placed at edge `{0, 1}`. Requires the pattern
    /// to be the standard cycle.
    pub fn normal_form_cycle(&self) -> Result<(PartialMatrix, Vec<i8>), PartialMatrixError> {
        let n = self.n();
        if n < 3 || self.graph != Graph::cycle(n) {
            return Err(PartialMatrixError::NotCycle);
        }
        // Edge i joins vertices i and i+1 mod n.
        let entry = |i: usize| self.edge(i, (i + 1) % n).unwrap();
        let sign = |x: f64| -> i8 {
            if x > 0.0 {
                1
            } else if x < 0.0 {
                -1
            } else {
                0
            }
        };
        let signs: Vec<i8> = (0..n).map(|i| sign(entry(i))).collect();
        let has_zero = signs.contains(&0);
        let product: i8 = signs.iter().map(|&s| if s == 0 { 1 } else { s }).product();

        let mut d = vec![1i8; n];
        if product > 0 || has_zero {
            // All entries can be made nonnegative. Walk the cycle; if the
            // wrap sign comes out negative, flip the tail after the last
            // zero edge (its entry is zero, so the flip is free).
            for i in 0..(n - 1) {
                let s = if signs[i] == 0 { 1 } else { signs[i] };
                d[i + 1] = d[i] * s;
            }
            let wrap = d[n - 1] * d[0] * if signs[n - 1] == 0 { 1 } else { signs[n - 1] };
            if wrap < 0 {
                let z = (0..n)
                    .rfind(|&i| signs[i] == 0)
                    .expect("negative wrap implies a zero edge");
                // Flipping d[z+1..] flips edge z (zero entry) and the wrap edge.
                for item in d.iter_mut().take(n).skip(z + 1) {
                    *item = -*item;
                }
            }
        } else {
            // Exactly one negative, forced onto edge {0, 1}.
            d[1] = -signs[0];
            for i in 1..(n - 1) {
                d[i + 1] = d[i] * signs[i];
            }
        }

        let mut out = self.clone();
        for i in 0..n {
            let j = (i + 1) % n;
            out.set_edge(i, j, f64::from(d[i]) * f64::from(d[j]) * entry(i));
        }
        Ok((out, d))
    }

    /// Schur complement reduction removing a universal apex vertex.
    ///
    /// With `b` the apex diagonal and `c` the apex row restricted to the
    /// rest, returns `Q - c c^T / b` projected onto the remaining pattern
    /// when `b > 0`, and the unmodified remainder when `b` and `c` both
    /// vanish. `b < -tol` and `b ~ 0` with nonzero `c` are rejected.
    pub fn schur_complement_cone(
        &self,
        apex: usize,
        tol: f64,
    ) -> Result<SchurOutcome, PartialMatrixError> {
        let n = self.n();
        if apex >= n || self.graph.degree(apex) != n - 1 {
            return Err(PartialMatrixError::ApexNotUniversal { apex });
        }
        let others: Vec<usize> = (0..n).filter(|&v| v != apex).collect();
        let b = self.diag[apex];
        if b < -tol {
            return Err(PartialMatrixError::NegativeApex { b });
        }
        let c: Vec<f64> = others
            .iter()
            .map(|&v| self.edge(apex, v).unwrap())
            .collect();
        let (mut reduced, map) = self.restrict(&others)?;
        if b <= tol {
            let scale = 1.0
                + others
                    .iter()
                    .map(|&v| self.diag[v].abs())
                    .fold(0.0, f64::max);
            for (k, &cv) in c.iter().enumerate() {
                if cv.abs() > (tol * scale).sqrt() {
                    return Err(PartialMatrixError::ZeroApexCoupling {
                        v: others[k],
                        c: cv,
                    });
                }
            }
            return Ok(SchurOutcome::ZeroApex { reduced, map });
        }
        for k in 0..others.len() {
            reduced.set_diag(k, reduced.diag(k) - c[k] * c[k] / b);
        }
        let edges: Vec<(usize, usize)> = reduced.graph().edges().to_vec();
        for (i, j) in edges {
            let v = reduced.edge(i, j).unwrap() - c[i] * c[j] / b;
            reduced.set_edge(i, j, v);
        }
        Ok(SchurOutcome::Reduced { reduced, map })
    }

    /// Parses the `n` / `i j value` text format. When `pattern` is given the
    /// entries must cover exactly its diagonal and edges; otherwise the
    /// pattern is implied by the off-diagonal entries present.
    pub fn parse(text: &str, pattern: Option<&Graph>) -> Result<PartialMatrix, PartialMatrixError> {
        let mut n: Option<usize> = None;
        let mut entries: Vec<(usize, usize, f64)> = vec![];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match n {
                None => {
                    if toks.len() != 1 {
                        return Err(PartialMatrixError::Parse {
                            line: lineno + 1,
                            msg: "expected a single field `n` in the header".into(),
                        });
                    }
                    n = Some(toks[0].parse().map_err(|_| PartialMatrixError::Parse {
                        line: lineno + 1,
                        msg: format!("bad integer {:?}", toks[0]),
                    })?);
                }
                Some(nn) => {
                    if toks.len() != 3 {
                        return Err(PartialMatrixError::Parse {
                            line: lineno + 1,
                            msg: format!("expected `i j value`, found {} fields", toks.len()),
                        });
                    }
                    let i: usize = toks[0].parse().map_err(|_| PartialMatrixError::Parse {
                        line: lineno + 1,
                        msg: format!("bad integer {:?}", toks[0]),
                    })?;
                    let j: usize = toks[1].parse().map_err(|_| PartialMatrixError::Parse {
                        line: lineno + 1,
                        msg: format!("bad integer {:?}", toks[1]),
                    })?;
                    let v: f64 = toks[2].parse().map_err(|_| PartialMatrixError::Parse {
                        line: lineno + 1,
                        msg: format!("bad value {:?}", toks[2]),
                    })?;
                    if i > j {
                        return Err(PartialMatrixError::Parse {
                            line: lineno + 1,
                            msg: format!("entries must have i <= j, found {i} {j}"),
                        });
                    }
                    if i >= nn || j >= nn {
                        return Err(PartialMatrixError::Parse {
                            line: lineno + 1,
                            msg: format!("index out of range for n = {nn}"),
                        });
                    }
                    entries.push((i, j, v));
                }
            }
        }
        let n = n.ok_or(PartialMatrixError::Parse {
            line: 0,
            msg: "missing `n` header".into(),
        })?;

        let graph = match pattern {
            Some(g) => {
                if g.vertex_count() != n {
                    return Err(PartialMatrixError::Parse {
                        line: 0,
                        msg: format!(
                            "pattern has {} vertices but matrix header says {n}",
                            g.vertex_count()
                        ),
                    });
                }
                g.clone()
            }
            None => {
                let mut edges: Vec<(usize, usize)> = entries
                    .iter()
                    .filter(|&&(i, j, _)| i != j)
                    .map(|&(i, j, _)| (i, j))
                    .collect();
                edges.sort_unstable();
                edges.dedup();
                Graph::with_edges(n, &edges)?
            }
        };

        let mut diag = vec![f64::NAN; n];
        let mut off = vec![];
        let mut seen_off = std::collections::BTreeSet::new();
        for (i, j, v) in entries {
            if i == j {
                if !diag[i].is_nan() {
                    return Err(PartialMatrixError::DuplicateEntry { i, j });
                }
                diag[i] = v;
            } else {
                if !seen_off.insert((i, j)) {
                    return Err(PartialMatrixError::DuplicateEntry { i, j });
                }
                off.push(((i, j), v));
            }
        }
        for (i, v) in diag.iter().enumerate() {
            if v.is_nan() {
                return Err(PartialMatrixError::Parse {
                    line: 0,
                    msg: format!("missing diagonal entry {i} {i}"),
                });
            }
        }
        PartialMatrix::new(graph, diag, &off)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n());
        for (i, j, v) in self.entries() {
            let _ = writeln!(s, "{i} {j} {v}");
        }
        s
    }
}

/// Extremal cycle matrix: diagonal `1/n`, edge `{0, 1}` negative, all other
/// edges positive, every entry `1/n` in magnitude.
pub fn extremal_cycle_matrix(n: usize) -> PartialMatrix {
    let g = Graph::cycle(n);
    let v = 1.0 / n as f64;
    let diag = vec![v; n];
    let off: Vec<_> = g
        .edges()
        .iter()
        .map(|&(i, j)| ((i, j), if (i, j) == (0, 1) { -v } else { v }))
        .collect();
    PartialMatrix::new(g, diag, &off).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Mat;
    use rand::rngs::SmallRng;
    use rand::{Rng, SeedableRng};

    fn assert_close(a: f64, b: f64, eps: f64, label: &str) {
        assert!((a - b).abs() <= eps, "{label}: {a} vs {b}");
    }

    fn random_psd(rng: &mut SmallRng, n: usize) -> SymmetricMatrix {
        let mut f = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                f[(i, j)] = rng.random_range(-1.0..1.0);
            }
        }
        SymmetricMatrix::from_mat(&f.mul(&f.transpose())).unwrap()
    }

    #[test]
    fn project_unit_vectors_on_c4() {
        // Unit vectors at angles 0, 90, 180, 270 degrees: consecutive inner
        // products vanish.
        let mut m = SymmetricMatrix::zeros(4);
        let angles = [0.0, 0.5, 1.0, 1.5].map(|t: f64| t * std::f64::consts::PI);
        for i in 0..4 {
            for j in i..4 {
                m.set(i, j, (angles[i] - angles[j]).cos());
            }
        }
        let a = PartialMatrix::project(&m, &Graph::cycle(4));
        for i in 0..4 {
            assert_close(a.diag(i), 1.0, 1e-15, "diag");
            assert_close(a.edge(i, (i + 1) % 4).unwrap(), 0.0, 1e-15, "edge");
        }
    }

    #[test]
    fn project_ignores_unspecified_entries() {
        let g = Graph::cycle(4);
        let mut m = SymmetricMatrix::identity(4);
        let a = PartialMatrix::project(&m, &g);
        m.set(0, 2, 7.5); // {0, 2} is not an edge of C4
        let b = PartialMatrix::project(&m, &g);
        assert_eq!(a, b);
    }

    #[test]
    fn restrict_cycle_to_path() {
        let a = extremal_cycle_matrix(5);
        let (r, map) = a.restrict(&[0, 1, 2]).unwrap();
        assert_eq!(map, vec![0, 1, 2]);
        assert_eq!(r.graph().edges(), &[(0, 1), (1, 2)]);
        assert_close(r.edge(0, 1).unwrap(), -0.2, 1e-15, "negative edge kept");
        assert_close(r.edge(1, 2).unwrap(), 0.2, 1e-15, "positive edge kept");
    }

    #[test]
    fn clique_block_of_wheel_triangle() {
        let w5 = Graph::wheel(5);
        let m = SymmetricMatrix::identity(6);
        let a = PartialMatrix::project(&m, &w5);
        let block = a.clique_block(&[0, 1, 5]).unwrap();
        assert_eq!(block, SymmetricMatrix::identity(3));
        assert!(
            a.clique_block(&[0, 1, 2]).is_err(),
            "rim triple is not a clique"
        );
    }

    #[test]
    fn extremal_cycle_matrix_is_partially_positive() {
        for n in 4..8 {
            let a = extremal_cycle_matrix(n);
            assert!(
                a.is_partially_positive(PARTIAL_POSITIVITY_TOL)
                    .is_positive(),
                "n = {n}"
            );
        }
    }

    #[test]
    fn violation_reports_lex_smallest_clique() {
        let mut a = extremal_cycle_matrix(4);
        // Both {0, 1} and {2, 3} fail; {0, 1} must be reported.
        a.set_edge(0, 1, -0.3);
        a.set_edge(2, 3, 0.3);
        match a.is_partially_positive(PARTIAL_POSITIVITY_TOL) {
            PartialPositivity::Violation { clique, lambda_min } => {
                assert_eq!(clique, vec![0, 1]);
                assert_close(lambda_min, 0.25 - 0.3, 1e-12, "block eigenvalue");
            }
            PartialPositivity::Positive => panic!("expected a violation"),
        }
    }

    #[test]
    fn projections_of_psd_are_partially_positive() {
        let mut rng = SmallRng::seed_from_u64(5);
        for _ in 0..50 {
            let n = 3 + rng.random_range(0..6);
            let m = random_psd(&mut rng, n);
            let g = {
                let mut edges = vec![];
                for i in 0..n {
                    for j in (i + 1)..n {
                        if rng.random::<f64>() < 0.5 {
                            edges.push((i, j));
                        }
                    }
                }
                Graph::with_edges(n, &edges).unwrap()
            };
            let a = PartialMatrix::project(&m, &g);
            assert!(a.is_partially_positive(1e-8).is_positive());
        }
    }

    #[test]
    fn normal_form_all_negative_c4() {
        let mut a = extremal_cycle_matrix(4);
        for i in 0..4 {
            a.set_edge(i, (i + 1) % 4, -0.25);
        }
        let (b, d) = a.normal_form_cycle().unwrap();
        let negatives = b
            .graph()
            .edges()
            .iter()
            .filter(|&&(i, j)| b.edge(i, j).unwrap() < 0.0)
            .count();
        assert_eq!(negatives, 0, "even sign product clears all negatives");
        assert!(d.iter().all(|&s| s == 1 || s == -1));
    }

    #[test]
    fn normal_form_keeps_extremal_matrix() {
        let a = extremal_cycle_matrix(5);
        let (b, _) = a.normal_form_cycle().unwrap();
        assert_eq!(a, b, "already in normal form");
    }

    #[test]
    fn normal_form_moves_single_negative_to_first_edge() {
        let mut a = extremal_cycle_matrix(5);
        a.set_edge(0, 1, 0.2);
        a.set_edge(2, 3, -0.2);
        let (b, _) = a.normal_form_cycle().unwrap();
        assert!(b.edge(0, 1).unwrap() < 0.0, "negative placed at {{0, 1}}");
        for &(i, j) in b.graph().edges() {
            if (i, j) != (0, 1) {
                assert!(b.edge(i, j).unwrap() > 0.0, "edge {{{i}, {j}}}");
            }
        }
    }

    #[test]
    fn normal_form_two_negatives_cancel() {
        let mut a = extremal_cycle_matrix(4);
        a.set_edge(0, 1, -0.25);
        a.set_edge(1, 2, -0.25);
        let (b, _) = a.normal_form_cycle().unwrap();
        for &(i, j) in b.graph().edges() {
            assert!(b.edge(i, j).unwrap() >= 0.0, "edge {{{i}, {j}}}");
        }
    }

    #[test]
    fn normal_form_matches_exhaustive_minimum() {
        let mut rng = SmallRng::seed_from_u64(77);
        for trial in 0..200 {
            let n = 4 + (trial % 4);
            let g = Graph::cycle(n);
            let diag = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
            let off: Vec<_> = g
                .edges()
                .iter()
                .map(|&e| {
                    let v = if rng.random::<f64>() < 0.2 {
                        0.0
                    } else {
                        rng.random_range(-1.0..1.0f64)
                    };
                    (e, v)
                })
                .collect();
            let a = PartialMatrix::new(g.clone(), diag, &off).unwrap();
            let (b, d) = a.normal_form_cycle().unwrap();
            let count_neg = |m: &PartialMatrix| {
                m.graph()
                    .edges()
                    .iter()
                    .filter(|&&(i, j)| m.edge(i, j).unwrap() < 0.0)
                    .count()
            };
            // Oracle: try all 2^n diagonal sign choices.
            let mut best = usize::MAX;
            for mask in 0u32..1 << n {
                let sgn = |v: usize| if mask >> v & 1 == 1 { -1.0 } else { 1.0 };
                let c = g
                    .edges()
                    .iter()
                    .filter(|&&(i, j)| sgn(i) * sgn(j) * a.edge(i, j).unwrap() < 0.0)
                    .count();
                best = best.min(c);
            }
            assert_eq!(count_neg(&b), best, "trial {trial}: not minimal");
            assert!(count_neg(&b) <= 1);
            if count_neg(&b) == 1 {
                assert!(
                    b.edge(0, 1).unwrap() < 0.0,
                    "trial {trial}: negative not at {{0, 1}}"
                );
            }
            // Conjugation preserves clique-block spectra.
            for &(i, j) in g.edges() {
                let orig = a.clique_block(&[i, j]).unwrap();
                let conj = b.clique_block(&[i, j]).unwrap();
                let ev_o = sym_eig(&orig).unwrap().values;
                let ev_c = sym_eig(&conj).unwrap().values;
                for k in 0..2 {
                    assert_close(ev_o[k], ev_c[k], 1e-12, "conjugated spectrum");
                }
            }
            let _ = d;
        }
    }

    #[test]
    fn normal_form_rejects_non_cycle() {
        let a = PartialMatrix::zeros(Graph::path(4));
        assert!(matches!(
            a.normal_form_cycle(),
            Err(PartialMatrixError::NotCycle)
        ));
    }

    #[test]
    fn schur_wheel_example() {
        // W4 with unit diagonal and all specified entries 1/2.
        let w4 = Graph::wheel(4);
        let diag = vec![1.0; 5];
        let off: Vec<_> = w4.edges().iter().map(|&e| (e, 0.5)).collect();
        let a = PartialMatrix::new(w4, diag, &off).unwrap();
        let out = a.schur_complement_cone(4, 1e-12).unwrap();
        let r = out.reduced();
        assert!(!out.is_zero_apex());
        for i in 0..4 {
            assert_close(r.diag(i), 0.75, 1e-15, "reduced diagonal");
        }
        for &(i, j) in r.graph().edges() {
            assert_close(r.edge(i, j).unwrap(), 0.25, 1e-15, "reduced rim edge");
        }
    }

    #[test]
    fn schur_zero_coupling_returns_q() {
        let c4 = Graph::cycle(4).cone();
        let mut a = PartialMatrix::zeros(c4);
        for i in 0..4 {
            a.set_diag(i, 1.0);
            a.set_edge(i, (i + 1) % 4, 0.3);
            a.set_edge(i, 4, 0.0);
        }
        let out = a.schur_complement_cone(4, 1e-12).unwrap();
        assert!(out.is_zero_apex());
        let r = out.reduced();
        for i in 0..4 {
            assert_close(r.diag(i), 1.0, 1e-15, "unmodified diag");
            assert_close(
                r.edge(i, (i + 1) % 4).unwrap(),
                0.3,
                1e-15,
                "unmodified edge",
            );
        }
    }

    #[test]
    fn schur_annihilates_projected_rank_one() {
        let mut rng = SmallRng::seed_from_u64(9);
        let g = Graph::cycle(5).cone();
        for _ in 0..20 {
            let v: Vec<f64> = (0..6).map(|_| rng.random_range(0.2..1.5)).collect();
            let mut m = SymmetricMatrix::zeros(6);
            for i in 0..6 {
                for j in i..6 {
                    m.set(i, j, v[i] * v[j]);
                }
            }
            let a = PartialMatrix::project(&m, &g);
            let out = a.schur_complement_cone(5, 1e-12).unwrap();
            for (i, j, val) in out.reduced().entries() {
                assert_close(val, 0.0, 1e-12, &format!("residual at ({i}, {j})"));
            }
        }
    }

    #[test]
    fn schur_rejects_bad_apex() {
        let a = PartialMatrix::zeros(Graph::cycle(4));
        assert!(matches!(
            a.schur_complement_cone(0, 1e-12),
            Err(PartialMatrixError::ApexNotUniversal { .. })
        ));
        let mut b = PartialMatrix::zeros(Graph::cycle(4).cone());
        b.set_diag(4, -1.0);
        assert!(matches!(
            b.schur_complement_cone(4, 1e-12),
            Err(PartialMatrixError::NegativeApex { .. })
        ));
        let mut c = PartialMatrix::zeros(Graph::cycle(4).cone());
        c.set_edge(0, 4, 0.5);
        assert!(matches!(
            c.schur_complement_cone(4, 1e-12),
            Err(PartialMatrixError::ZeroApexCoupling { .. })
        ));
    }

    #[test]
    fn schur_matches_per_clique_blocks() {
        // The reduced block on a clique equals the Schur complement of the
        // clique-plus-apex block.
        let mut rng = SmallRng::seed_from_u64(100);
        for _ in 0..50 {
            let base = Graph::cycle(4);
            let g = base.cone();
            let m = random_psd(&mut rng, 5);
            let mut a = PartialMatrix::project(&m, &g);
            if a.diag(4) < 0.1 {
                a.set_diag(4, a.diag(4) + 1.0);
            }
            let out = a.schur_complement_cone(4, 1e-12).unwrap();
            let r = out.reduced();
            for &(i, j) in base.edges() {
                let big = a.clique_block(&[i, j, 4]).unwrap();
                let b = big.get(2, 2);
                let want00 = big.get(0, 0) - big.get(0, 2) * big.get(0, 2) / b;
                let want01 = big.get(0, 1) - big.get(0, 2) * big.get(1, 2) / b;
                let want11 = big.get(1, 1) - big.get(1, 2) * big.get(1, 2) / b;
                assert_close(r.diag(i), want00, 1e-12, "schur diag i");
                assert_close(r.edge(i, j).unwrap(), want01, 1e-12, "schur edge");
                assert_close(r.diag(j), want11, 1e-12, "schur diag j");
            }
        }
    }

    #[test]
    fn schur_preserves_partial_positivity() {
        let mut rng = SmallRng::seed_from_u64(41);
        for trial in 0..200 {
            let n = 3 + (trial % 6);
            let mut edges = vec![];
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random::<f64>() < 0.5 {
                        edges.push((i, j));
                    }
                }
            }
            let g = Graph::with_edges(n, &edges).unwrap().cone();
            let m = random_psd(&mut rng, n + 1);
            let a = PartialMatrix::project(&m, &g);
            if a.diag(n) <= 1e-9 {
                continue;
            }
            let out = a.schur_complement_cone(n, 1e-12).unwrap();
            assert!(
                out.reduced().is_partially_positive(1e-7).is_positive(),
                "trial {trial}: reduction left the cone"
            );
        }
    }

    #[test]
    fn parse_round_trip_with_implied_graph() {
        let a = extremal_cycle_matrix(5);
        let b = PartialMatrix::parse(&a.to_text(), None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parse_with_explicit_pattern_checks_support() {
        let a = extremal_cycle_matrix(4);
        let ok = PartialMatrix::parse(&a.to_text(), Some(&Graph::cycle(4))).unwrap();
        assert_eq!(a, ok);
        // Same entries against a pattern with an extra edge: missing value.
        let g = Graph::with_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)]).unwrap();
        assert!(matches!(
            PartialMatrix::parse(&a.to_text(), Some(&g)),
            Err(PartialMatrixError::MissingEdge { .. })
        ));
    }

    #[test]
    fn parse_rejects_malformed_inputs() {
        assert!(PartialMatrix::parse("", None).is_err(), "empty");
        assert!(
            PartialMatrix::parse("2\n0 0 1.0\n", None).is_err(),
            "missing diagonal 1"
        );
        assert!(
            PartialMatrix::parse("2\n0 0 1.0\n1 1 1.0\n0 1 0.5\n0 1 0.5\n", None).is_err(),
            "duplicate entry"
        );
        assert!(
            PartialMatrix::parse("2\n0 0 1.0\n1 1 1.0\n1 0 0.5\n", None).is_err(),
            "i > j"
        );
        assert!(
            PartialMatrix::parse("2\n0 0 1.0\n1 1 1.0\n0 3 0.5\n", None).is_err(),
            "index out of range"
        );
        assert!(
            PartialMatrix::parse("2\n0 0 abc\n1 1 1.0\n", None).is_err(),
            "bad value"
        );
    }
}
