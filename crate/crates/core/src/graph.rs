//! Undirected simple graphs on vertices `0..n`.
//!
//! The operations here feed the sparsity analysis:
//!
//! 1. [`Graph::maximal_cliques`] enumerates maximal cliques by
//!    Bron-Kerbosch with pivoting, in deterministic lexicographic order.
//! 2. [`Graph::chordality`] runs maximum cardinality search and verifies the
//!    candidate elimination ordering, returning either the ordering or a
//!    chordless witness cycle.
//! 3. [`Graph::shortest_hole`] finds a shortest chordless cycle of length
//!    >= 4 by one BFS per edge with the edge's common neighborhood removed;
//!    a shortest path cannot shortcut itself, so the resulting cycle is
//!    induced (still verified defensively).
//!
//! The text format is line oriented: `n m` on the first line, one `u v` pair
//! per edge after it, `#` starts a comment.

use std::collections::VecDeque;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex {v} out of range for {n} vertices")]
    VertexOutOfRange { v: usize, n: usize },
    #[error("self loop at vertex {v}")]
    SelfLoop { v: usize },
    #[error("duplicate edge {{{u}, {v}}}")]
    DuplicateEdge { u: usize, v: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Fixed-capacity vertex set backed by 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct VertSet {
    words: Vec<u64>,
}

impl VertSet {
    pub fn empty(n: usize) -> Self {
        VertSet {
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn insert(&mut self, v: usize) {
        self.words[v / 64] |= 1 << (v % 64);
    }

    pub fn remove(&mut self, v: usize) {
        self.words[v / 64] &= !(1 << (v % 64));
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn intersect(&self, other: &VertSet) -> VertSet {
        VertSet {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn minus(&self, other: &VertSet) -> VertSet {
        VertSet {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & !b)
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }
}

/// Chordality verdict: a perfect elimination ordering, or a chordless cycle
/// of length >= 4 listed in traversal order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Chordality {
    Chordal { elimination_order: Vec<usize> },
    Hole { cycle: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![false; n * n],
            edges: vec![],
        }
    }

    pub fn with_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        if u >= self.n {
            return Err(GraphError::VertexOutOfRange { v: u, n: self.n });
        }
        if v >= self.n {
            return Err(GraphError::VertexOutOfRange { v, n: self.n });
        }
        if u == v {
            return Err(GraphError::SelfLoop { v });
        }
        let (a, b) = (u.min(v), u.max(v));
        if self.adj[a * self.n + b] {
            return Err(GraphError::DuplicateEdge { u: a, v: b });
        }
        self.adj[a * self.n + b] = true;
        self.adj[b * self.n + a] = true;
        let pos = self.edges.partition_point(|e| *e < (a, b));
        self.edges.insert(pos, (a, b));
        Ok(())
    }

    /// Cycle `0-1-...-(n-1)-0`; requires `n >= 3`.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::with_edges(n, &edges).unwrap()
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = vec![];
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        Graph::with_edges(n, &edges).unwrap()
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::with_edges(n, &edges).unwrap()
    }

    /// Wheel: cycle `0..rim` plus hub vertex `rim` adjacent to every rim
    /// vertex.
    pub fn wheel(rim: usize) -> Self {
        Graph::cycle(rim).cone()
    }

    /// Adds a new universal vertex with index `n`.
    pub fn cone(&self) -> Self {
        let mut edges = self.edges.clone();
        for v in 0..self.n {
            edges.push((v, self.n));
        }
        Graph::with_edges(self.n + 1, &edges).unwrap()
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.adj[u * self.n + v]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&u| self.adj[v * self.n + u])
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).count()
    }

    pub(crate) fn neighbor_set(&self, v: usize) -> VertSet {
        let mut s = VertSet::empty(self.n);
        for u in self.neighbors(v) {
            s.insert(u);
        }
        s
    }

    pub fn is_clique(&self, verts: &[usize]) -> bool {
        for (a, &u) in verts.iter().enumerate() {
            for &v in &verts[a + 1..] {
                if u == v || !self.has_edge(u, v) {
                    return false;
                }
            }
        }
        true
    }

    /// Induced subgraph on `verts` (deduplicated, sorted ascending).
    /// Returns the subgraph and the map from new index to original vertex.
    pub fn induced_subgraph(&self, verts: &[usize]) -> Result<(Graph, Vec<usize>), GraphError> {
        let mut map: Vec<usize> = verts.to_vec();
        map.sort_unstable();
        map.dedup();
        for &v in &map {
            if v >= self.n {
                return Err(GraphError::VertexOutOfRange { v, n: self.n });
            }
        }
        let mut edges = vec![];
        for i in 0..map.len() {
            for j in (i + 1)..map.len() {
                if self.has_edge(map[i], map[j]) {
                    edges.push((i, j));
                }
            }
        }
        Ok((Graph::with_edges(map.len(), &edges).unwrap(), map))
    }

    /// Connected components, each sorted ascending, ordered by smallest
    /// vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = vec![];
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![];
            let mut queue = VecDeque::from([s]);
            seen[s] = true;
            while let Some(v) = queue.pop_front() {
                comp.push(v);
                for u in self.neighbors(v) {
                    if !seen[u] {
                        seen[u] = true;
                        queue.push_back(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.components().len() == 1
    }

    /// All maximal cliques, each sorted ascending, the list sorted
    /// lexicographically. Bron-Kerbosch with greedy pivoting; the pivot is
    /// the candidate vertex covering the most of `P`, ties to the smallest
    /// index, which makes the enumeration deterministic.
    pub fn maximal_cliques(&self) -> Vec<Vec<usize>> {
        if self.n == 0 {
            return vec![];
        }
        let nbrs: Vec<VertSet> = (0..self.n).map(|v| self.neighbor_set(v)).collect();
        let mut p = VertSet::empty(self.n);
        for v in 0..self.n {
            p.insert(v);
        }
        let x = VertSet::empty(self.n);
        let mut r = vec![];
        let mut out = vec![];
        bron_kerbosch(&nbrs, &mut r, p, x, &mut out);
        out.sort();
        out
    }

    /// Chordality test: maximum cardinality search produces the candidate
    /// ordering, which is then verified directly (every vertex's later
    /// neighborhood must be a clique). On failure the witness is a shortest
    /// hole.
    pub fn chordality(&self) -> Chordality {
        let order = self.mcs_order();
        let mut pos = vec![0usize; self.n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        for &v in &order {
            let later: Vec<usize> = self.neighbors(v).filter(|&u| pos[u] > pos[v]).collect();
            for (a, &x) in later.iter().enumerate() {
                for &y in &later[a + 1..] {
                    if !self.has_edge(x, y) {
                        let cycle = self
                            .shortest_hole()
                            .expect("failed elimination ordering implies a hole");
                        return Chordality::Hole { cycle };
                    }
                }
            }
        }
        Chordality::Chordal {
            elimination_order: order,
        }
    }

    pub fn is_chordal(&self) -> bool {
        matches!(self.chordality(), Chordality::Chordal { .. })
    }

    /// Maximum cardinality search; the visit order is reversed so that the
    /// result is a perfect elimination ordering whenever the graph is
    /// chordal. Ties break to the smallest vertex.
    fn mcs_order(&self) -> Vec<usize> {
        let mut weight = vec![0usize; self.n];
        let mut visited = vec![false; self.n];
        let mut visit = vec![];
        for _ in 0..self.n {
            let v = (0..self.n)
                .filter(|&v| !visited[v])
                .max_by_key(|&v| (weight[v], self.n - v))
                .unwrap();
            visited[v] = true;
            visit.push(v);
            for u in self.neighbors(v) {
                if !visited[u] {
                    weight[u] += 1;
                }
            }
        }
        visit.reverse();
        visit
    }

    /// Shortest chordless cycle of length >= 4, or `None` if the graph is
    /// chordal. The cycle is listed in traversal order.
    pub fn shortest_hole(&self) -> Option<Vec<usize>> {
        let mut best: Option<Vec<usize>> = None;
        for &(u, v) in &self.edges {
            // Vertices adjacent to both endpoints would chord any cycle
            // through the edge, so drop them before searching for the path.
            let mut blocked = vec![false; self.n];
            for w in 0..self.n {
                if w != u && w != v && self.has_edge(u, w) && self.has_edge(v, w) {
                    blocked[w] = true;
                }
            }
            let limit = best.as_ref().map(|c| c.len() - 1);
            if let Some(path) = self.shortest_path_avoiding(u, v, &blocked, limit) {
                let mut cycle = path;
                debug_assert!(cycle.len() >= 4);
                if self.cycle_is_induced(&cycle) {
                    if best.as_ref().is_none_or(|b| cycle.len() < b.len()) {
                        best = Some(std::mem::take(&mut cycle));
                        if best.as_ref().unwrap().len() == 4 {
                            return best;
                        }
                    }
                } else {
                    debug_assert!(false, "shortest-path cycle must be induced");
                }
            }
        }
        best
    }

    /// Shortest chordless cycle length, `None` when chordal.
    pub fn chordal_girth(&self) -> Option<usize> {
        self.shortest_hole().map(|c| c.len())
    }

    /// BFS path from `u` to `v` avoiding blocked vertices and the edge
    /// `{u, v}` itself; only paths with at least 3 edges remain. Neighbor
    /// expansion in ascending order keeps the parent choice deterministic.
    fn shortest_path_avoiding(
        &self,
        u: usize,
        v: usize,
        blocked: &[bool],
        shorter_than: Option<usize>,
    ) -> Option<Vec<usize>> {
        let mut parent = vec![usize::MAX; self.n];
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = VecDeque::from([u]);
        dist[u] = 0;
        while let Some(w) = queue.pop_front() {
            if let Some(cap) = shorter_than {
                if dist[w] + 1 >= cap {
                    // Even one more step cannot beat the incumbent.
                    continue;
                }
            }
            for x in self.neighbors(w) {
                if blocked[x] || dist[x] != usize::MAX {
                    continue;
                }
                if (w == u && x == v) || (w == v && x == u) {
                    continue;
                }
                dist[x] = dist[w] + 1;
                parent[x] = w;
                if x == v {
                    let mut path = vec![v];
                    let mut cur = v;
                    while cur != u {
                        cur = parent[cur];
                        path.push(cur);
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(x);
            }
        }
        None
    }

    /// True when `cycle` is chordless: consecutive vertices adjacent, all
    /// other pairs non-adjacent.
    pub fn cycle_is_induced(&self, cycle: &[usize]) -> bool {
        let k = cycle.len();
        if k < 4 {
            return false;
        }
        for i in 0..k {
            for j in (i + 1)..k {
                let consecutive = j == i + 1 || (i == 0 && j == k - 1);
                if consecutive != self.has_edge(cycle[i], cycle[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// Parses the `n m` / `u v` text format. `#` starts a comment anywhere
    /// in a line; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Graph, GraphError> {
        let mut header: Option<(usize, usize)> = None;
        let mut g = Graph::empty(0);
        let mut m_expected = 0usize;
        let mut m_seen = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(GraphError::Parse {
                    line: lineno + 1,
                    msg: format!("expected two fields, found {}", toks.len()),
                });
            }
            let a: usize = toks[0].parse().map_err(|_| GraphError::Parse {
                line: lineno + 1,
                msg: format!("bad integer {:?}", toks[0]),
            })?;
            let b: usize = toks[1].parse().map_err(|_| GraphError::Parse {
                line: lineno + 1,
                msg: format!("bad integer {:?}", toks[1]),
            })?;
            match header {
                None => {
                    header = Some((a, b));
                    m_expected = b;
                    g = Graph::empty(a);
                }
                Some(_) => {
                    if m_seen == m_expected {
                        return Err(GraphError::Parse {
                            line: lineno + 1,
                            msg: format!("more than {m_expected} edge lines"),
                        });
                    }
                    g.add_edge(a, b)?;
                    m_seen += 1;
                }
            }
        }
        if header.is_none() {
            return Err(GraphError::Parse {
                line: 0,
                msg: "missing `n m` header".into(),
            });
        }
        if m_seen != m_expected {
            return Err(GraphError::Parse {
                line: 0,
                msg: format!("expected {m_expected} edges, found {m_seen}"),
            });
        }
        Ok(g)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }
}

fn bron_kerbosch(
    nbrs: &[VertSet],
    r: &mut Vec<usize>,
    p: VertSet,
    mut x: VertSet,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() && x.is_empty() {
        let mut clique = r.clone();
        clique.sort_unstable();
        out.push(clique);
        return;
    }
    // Pivot: candidate (in P or X) whose neighborhood covers most of P.
    let pivot = p
        .iter()
        .chain(x.iter())
        .max_by_key(|&u| (p.intersect(&nbrs[u]).count(), usize::MAX - u))
        .unwrap();
    let candidates: Vec<usize> = p.minus(&nbrs[pivot]).iter().collect();
    let mut p = p;
    for v in candidates {
        r.push(v);
        bron_kerbosch(nbrs, r, p.intersect(&nbrs[v]), x.intersect(&nbrs[v]), out);
        r.pop();
        p.remove(v);
        x.insert(v);
    }
}
