//! Recognition of the tractable pattern class and its expansion constant.
//!
//! A pattern belongs to the class when every atom of its clique-separator
//! decomposition is a cone (join with a complete graph) over a
//! series-parallel graph. For members the expansion constant depends only
//! on the longest hole length g: `(1/g) (1/cos(pi/g) - 1)`, and is 0 for
//! chordal patterns.
//!
//! Pieces:
//!
//! 1. `clique_separator_decomposition`: recursive split on the
//!    lexicographically smallest minimum-size clique separator. Atoms are
//!    emitted in a valid reassembly order: each atom meets the union of its
//!    predecessors in exactly the recorded separator.
//! 2. `is_series_parallel`: multigraph reduction (merge parallel edges,
//!    drop isolated and pendant vertices, smooth degree-2 vertices) with a
//!    step trace. A nonempty irreducible kernel has minimum degree 3 and
//!    therefore a K4 subdivision, which is located as a witness.
//! 3. `peel_cone_vertices`: strips universal vertices greedily.
//! 4. `is_in_class` / `epsilon_of_class_member`: the full test with a
//!    structured certificate.

use crate::graph::Graph;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RecognitionError {
    #[error("pattern is not in the recognized class: atom {atom:?} is not a cone over a series-parallel graph")]
    NotInClass { atom: Vec<usize> },
    #[error("expansion constant of a cycle needs length >= 4, got {n}")]
    ShortCycle { n: usize },
}

/// Expansion constant of a chordless cycle: `(1/n) (1/cos(pi/n) - 1)`.
/// Defined for `n >= 4`; triangles are chordal and have constant 0.
pub fn cycle_epsilon(n: usize) -> f64 {
    assert!(n >= 4, "chordless cycles have at least 4 vertices");
    (1.0 / n as f64) * (1.0 / (std::f64::consts::PI / n as f64).cos() - 1.0)
}

// ---------------------------------------------------------------------------
// Clique-separator decomposition.

/// Atoms in reassembly order: atom k+1 intersects the union of atoms
/// 0..=k in exactly `separators[k]`, which is a clique (possibly empty for
/// disconnected graphs).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomDecomposition {
    atoms: Vec<Vec<usize>>,
    separators: Vec<Vec<usize>>,
}

impl AtomDecomposition {
    pub fn atoms(&self) -> &[Vec<usize>] {
        &self.atoms
    }

    pub fn separators(&self) -> &[Vec<usize>] {
        &self.separators
    }

    /// Checks the reassembly invariant against the source graph: separators
    /// are cliques, each atom meets the prefix union in exactly its
    /// separator, vertices and edges are covered, and no atom invents an
    /// edge.
    pub fn verify(&self, g: &Graph) -> bool {
        let n = g.vertex_count();
        if self.atoms.is_empty() {
            return n == 0;
        }
        if self.separators.len() + 1 != self.atoms.len() {
            return false;
        }
        let mut seen = vec![false; n];
        let mut covered = vec![false; g.edge_count()];
        let edge_slot: BTreeMap<(usize, usize), usize> =
            g.edges().iter().enumerate().map(|(k, &e)| (e, k)).collect();
        for (k, atom) in self.atoms.iter().enumerate() {
            if atom.windows(2).any(|w| w[0] >= w[1]) || atom.iter().any(|&v| v >= n) {
                return false;
            }
            let inter: Vec<usize> = atom.iter().copied().filter(|&v| seen[v]).collect();
            if k == 0 {
                if !inter.is_empty() {
                    return false;
                }
            } else {
                if inter != self.separators[k - 1] {
                    return false;
                }
                if !g.is_clique(&inter) {
                    return false;
                }
            }
            for (ai, &u) in atom.iter().enumerate() {
                seen[u] = true;
                for &v in &atom[ai + 1..] {
                    if let Some(&slot) = edge_slot.get(&(u, v)) {
                        covered[slot] = true;
                    }
                }
            }
        }
        seen.iter().all(|&b| b) && covered.iter().all(|&b| b)
    }
}

/// Smallest clique separator of `g` in (size, lexicographic) order, or
/// `None` for an atom. The empty set counts when `g` is disconnected.
fn find_clique_separator(g: &Graph) -> Option<Vec<usize>> {
    let n = g.vertex_count();
    for size in 0..n.saturating_sub(1) {
        let mut found: Option<Vec<usize>> = None;
        for_each_combination(n, size, &mut |subset| {
            if found.is_some() {
                return;
            }
            if !g.is_clique(subset) {
                return;
            }
            let rest: Vec<usize> = (0..n).filter(|v| !subset.contains(v)).collect();
            if rest.len() < 2 {
                return;
            }
            let (sub, _) = g.induced_subgraph(&rest).unwrap();
            if !sub.is_connected() {
                found = Some(subset.to_vec());
            }
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Calls `f` for every size-`k` subset of `0..n` in lexicographic order.
fn for_each_combination(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in (i + 1)..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Decomposes along minimum-size clique separators until no atom has one.
pub fn clique_separator_decomposition(g: &Graph) -> AtomDecomposition {
    let mut atoms = vec![];
    let mut separators = vec![];
    let verts: Vec<usize> = (0..g.vertex_count()).collect();
    if !verts.is_empty() {
        decompose_rec(g, verts, &[], &mut atoms, &mut separators);
    }
    AtomDecomposition { atoms, separators }
}

/// Recursive split. `anchor` is a clique the caller glues along; the first
/// atom emitted must contain it so the flattened order reassembles.
fn decompose_rec(
    g: &Graph,
    verts: Vec<usize>,
    anchor: &[usize],
    atoms: &mut Vec<Vec<usize>>,
    separators: &mut Vec<Vec<usize>>,
) {
    let (sub, map) = g.induced_subgraph(&verts).unwrap();
    let sep_local = match find_clique_separator(&sub) {
        None => {
            atoms.push(verts);
            return;
        }
        Some(s) => s,
    };
    let sep: Vec<usize> = sep_local.iter().map(|&v| map[v]).collect();
    let rest: Vec<usize> = (0..sub.vertex_count())
        .filter(|v| !sep_local.contains(v))
        .collect();
    let (rest_graph, rest_map) = sub.induced_subgraph(&rest).unwrap();
    let mut parts: Vec<Vec<usize>> = rest_graph
        .components()
        .into_iter()
        .map(|comp| {
            let mut part: Vec<usize> = comp.iter().map(|&v| map[rest_map[v]]).collect();
            part.extend_from_slice(&sep);
            part.sort_unstable();
            part
        })
        .collect();
    // The part holding the anchor goes first; the anchor sits inside one
    // component (it is a clique) or inside the separator, in which case any
    // order works.
    let anchor_pos = parts
        .iter()
        .position(|p| anchor.iter().all(|v| p.contains(v)))
        .unwrap_or(0);
    parts.swap(0, anchor_pos);
    for (idx, part) in parts.into_iter().enumerate() {
        if idx == 0 {
            decompose_rec(g, part, anchor, atoms, separators);
        } else {
            separators.push(sep.clone());
            decompose_rec(g, part, &sep, atoms, separators);
        }
    }
}

// ---------------------------------------------------------------------------
// Series-parallel reduction.

/// One multigraph reduction step, in the labels of the graph handed to
/// [`is_series_parallel`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpStep {
    RemoveIsolated { v: usize },
    RemovePendant { v: usize, neighbor: usize },
    Smooth { v: usize, left: usize, right: usize },
    MergeParallel { u: usize, v: usize },
}

impl SpStep {
    fn relabel(&self, map: &[usize]) -> SpStep {
        match *self {
            SpStep::RemoveIsolated { v } => SpStep::RemoveIsolated { v: map[v] },
            SpStep::RemovePendant { v, neighbor } => SpStep::RemovePendant {
                v: map[v],
                neighbor: map[neighbor],
            },
            SpStep::Smooth { v, left, right } => SpStep::Smooth {
                v: map[v],
                left: map[left],
                right: map[right],
            },
            SpStep::MergeParallel { u, v } => SpStep::MergeParallel {
                u: map[u],
                v: map[v],
            },
        }
    }
}

/// Four vertex-disjoint branch vertices joined by six internally disjoint
/// paths, pair order (0,1), (0,2), (0,3), (1,2), (1,3), (2,3). Paths list
/// both endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct K4Witness {
    pub branch: [usize; 4],
    pub paths: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct SeriesParallelCheck {
    pub series_parallel: bool,
    pub trace: Vec<SpStep>,
    /// Irreducible kernel vertices (minimum degree 3); empty when
    /// series-parallel.
    pub kernel: Vec<usize>,
    /// Located K4 subdivision; `None` when series-parallel or when the
    /// search budget runs out.
    pub k4_witness: Option<K4Witness>,
}

/// Reduces the graph as a multigraph until empty or irreducible. Empty
/// means series-parallel (treewidth at most 2, no K4 minor); otherwise the
/// kernel certifies a K4 minor and a subdivision witness is searched.
pub fn is_series_parallel(g: &Graph) -> SeriesParallelCheck {
    let n = g.vertex_count();
    let mut alive = vec![true; n];
    let mut mult: BTreeMap<(usize, usize), usize> = g.edges().iter().map(|&e| (e, 1)).collect();
    let mut trace = vec![];

    let degree = |mult: &BTreeMap<(usize, usize), usize>, v: usize| -> usize {
        mult.iter()
            .filter(|(&(a, b), _)| a == v || b == v)
            .map(|(_, &c)| c)
            .sum()
    };
    let neighbors = |mult: &BTreeMap<(usize, usize), usize>, v: usize| -> Vec<usize> {
        mult.keys()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    };

    loop {
        // One reduction per pass, first applicable in a fixed priority:
        // parallel merges keep smoothing loop-free.
        if let Some((&(u, v), _)) = mult.iter().find(|(_, &c)| c >= 2) {
            mult.insert((u, v), 1);
            trace.push(SpStep::MergeParallel { u, v });
            continue;
        }
        let mut acted = false;
        for v in 0..n {
            if !alive[v] {
                continue;
            }
            match degree(&mult, v) {
                0 => {
                    alive[v] = false;
                    trace.push(SpStep::RemoveIsolated { v });
                    acted = true;
                }
                1 => {
                    let u = neighbors(&mult, v)[0];
                    mult.remove(&(u.min(v), u.max(v)));
                    alive[v] = false;
                    trace.push(SpStep::RemovePendant { v, neighbor: u });
                    acted = true;
                }
                2 => {
                    let nb = neighbors(&mult, v);
                    let (a, b) = (nb[0], nb[1]);
                    debug_assert_ne!(a, b, "parallel edges merged before smoothing");
                    mult.remove(&(a.min(v), a.max(v)));
                    mult.remove(&(b.min(v), b.max(v)));
                    alive[v] = false;
                    *mult.entry((a.min(b), a.max(b))).or_insert(0) += 1;
                    trace.push(SpStep::Smooth {
                        v,
                        left: a.min(b),
                        right: a.max(b),
                    });
                    acted = true;
                }
                _ => continue,
            }
            break;
        }
        if !acted {
            break;
        }
    }

    let kernel: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    if kernel.is_empty() {
        return SeriesParallelCheck {
            series_parallel: true,
            trace,
            kernel,
            k4_witness: None,
        };
    }
    SeriesParallelCheck {
        series_parallel: false,
        trace,
        kernel,
        k4_witness: find_k4_subdivision(g),
    }
}

/// Searches for a K4 subdivision: four branch vertices of degree at least 3
/// joined by six internally disjoint paths. Complete for K4 because its
/// maximum degree is 3, so minor and topological minor coincide.
pub fn find_k4_subdivision(g: &Graph) -> Option<K4Witness> {
    let n = g.vertex_count();
    let candidates: Vec<usize> = (0..n).filter(|&v| g.degree(v) >= 3).collect();
    let mut budget = 2_000_000usize;
    let mut result = None;
    for_each_combination(candidates.len(), 4, &mut |pick| {
        if result.is_some() || budget == 0 {
            return;
        }
        let branch = [
            candidates[pick[0]],
            candidates[pick[1]],
            candidates[pick[2]],
            candidates[pick[3]],
        ];
        let mut used = vec![false; n];
        for &b in &branch {
            used[b] = true;
        }
        let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let mut paths: Vec<Vec<usize>> = vec![];
        if connect_pairs(g, &branch, &pairs, 0, &mut used, &mut paths, &mut budget) {
            result = Some(K4Witness { branch, paths });
        }
    });
    result
}

/// Backtracking over the pair list: tries every simple path for the current
/// pair whose interior avoids used vertices, then recurses.
fn connect_pairs(
    g: &Graph,
    branch: &[usize; 4],
    pairs: &[(usize, usize)],
    at: usize,
    used: &mut Vec<bool>,
    paths: &mut Vec<Vec<usize>>,
    budget: &mut usize,
) -> bool {
    if at == pairs.len() {
        return true;
    }
    let (s, t) = (branch[pairs[at].0], branch[pairs[at].1]);
    let mut path = vec![s];
    let mut on_found = |path: &[usize], used: &mut Vec<bool>, budget: &mut usize| -> bool {
        paths.push(path.to_vec());
        if connect_pairs(g, branch, pairs, at + 1, used, paths, budget) {
            true
        } else {
            paths.pop();
            false
        }
    };
    extend_path(g, t, used, &mut path, &mut on_found, budget)
}

/// Depth-first enumeration of simple paths from the tail of `path` to
/// `target`; interiors are marked in `used` while exploring.
fn extend_path(
    g: &Graph,
    target: usize,
    used: &mut Vec<bool>,
    path: &mut Vec<usize>,
    on_found: &mut dyn FnMut(&[usize], &mut Vec<bool>, &mut usize) -> bool,
    budget: &mut usize,
) -> bool {
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let head = *path.last().unwrap();
    for w in g.neighbors(head) {
        if w == target {
            path.push(w);
            let done = on_found(path, used, budget);
            path.pop();
            if done {
                return true;
            }
            continue;
        }
        if used[w] {
            continue;
        }
        used[w] = true;
        path.push(w);
        let done = extend_path(g, target, used, path, on_found, budget);
        path.pop();
        used[w] = false;
        if done {
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Cone peeling and membership.

#[derive(Debug, Clone)]
pub struct ConePeel {
    /// Universal vertices in peel order.
    pub peeled: Vec<usize>,
    pub remainder: Graph,
    /// Remainder label -> input label.
    pub remainder_map: Vec<usize>,
}

/// Strips universal vertices greedily (smallest label first). The result
/// has no universal vertex unless it is empty.
pub fn peel_cone_vertices(g: &Graph) -> ConePeel {
    let mut current = g.clone();
    let mut map: Vec<usize> = (0..g.vertex_count()).collect();
    let mut peeled = vec![];
    loop {
        let n = current.vertex_count();
        // A 1-vertex graph counts its vertex as universal, so complete
        // graphs peel down to the empty remainder.
        let apex = match (0..n).find(|&v| current.degree(v) == n - 1) {
            Some(v) => v,
            None => break,
        };
        peeled.push(map[apex]);
        let keep: Vec<usize> = (0..n).filter(|&v| v != apex).collect();
        let (next, sub_map) = current.induced_subgraph(&keep).unwrap();
        map = sub_map.iter().map(|&v| map[v]).collect();
        current = next;
    }
    ConePeel {
        peeled,
        remainder: current,
        remainder_map: map,
    }
}

/// Per-atom analysis in original graph labels.
#[derive(Debug, Clone)]
pub struct AtomReport {
    pub vertices: Vec<usize>,
    pub peeled: Vec<usize>,
    pub series_parallel: bool,
    pub sp_trace: Vec<SpStep>,
    pub kernel: Vec<usize>,
    pub k4_witness: Option<K4Witness>,
}

#[derive(Debug, Clone)]
pub struct MembershipCertificate {
    pub member: bool,
    pub chordal: bool,
    /// Shortest hole length; `None` when chordal.
    pub girth: Option<usize>,
    /// Expansion constant; present for members only.
    pub epsilon: Option<f64>,
    pub atoms: Vec<AtomReport>,
    pub separators: Vec<Vec<usize>>,
}

impl MembershipCertificate {
    /// Stable key-value text rendering.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "member: {}", self.member);
        let _ = writeln!(s, "chordal: {}", self.chordal);
        match self.girth {
            Some(g) => {
                let _ = writeln!(s, "girth: {g}");
            }
            None => {
                let _ = writeln!(s, "girth: none");
            }
        }
        if let Some(eps) = self.epsilon {
            let _ = writeln!(s, "epsilon: {}", crate::numerics::format_sig10(eps));
        }
        let _ = writeln!(s, "atoms: {}", self.atoms.len());
        let join = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        for (k, atom) in self.atoms.iter().enumerate() {
            let _ = writeln!(s, "atom {k} vertices: {}", join(&atom.vertices));
            if !atom.peeled.is_empty() {
                let _ = writeln!(s, "atom {k} peeled: {}", join(&atom.peeled));
            }
            let _ = writeln!(s, "atom {k} series-parallel: {}", atom.series_parallel);
            if !atom.kernel.is_empty() {
                let _ = writeln!(s, "atom {k} kernel: {}", join(&atom.kernel));
            }
            if let Some(w) = &atom.k4_witness {
                let _ = writeln!(s, "atom {k} k4 branch: {}", join(&w.branch));
                for (p, path) in w.paths.iter().enumerate() {
                    let _ = writeln!(s, "atom {k} k4 path {p}: {}", join(path));
                }
            }
        }
        for (k, sep) in self.separators.iter().enumerate() {
            let _ = writeln!(s, "separator {k}: {}", join(sep));
        }
        s
    }
}

/// Full membership test: decompose, peel each atom, check the remainder
/// for series-parallelness.
pub fn is_in_class(g: &Graph) -> MembershipCertificate {
    let dec = clique_separator_decomposition(g);
    let mut atoms = vec![];
    let mut member = true;
    for atom_verts in dec.atoms() {
        let (sub, map) = g.induced_subgraph(atom_verts).unwrap();
        let peel = peel_cone_vertices(&sub);
        let check = is_series_parallel(&peel.remainder);
        // Remainder label -> atom label -> original label.
        let to_orig: Vec<usize> = peel.remainder_map.iter().map(|&v| map[v]).collect();
        member &= check.series_parallel;
        atoms.push(AtomReport {
            vertices: atom_verts.clone(),
            peeled: peel.peeled.iter().map(|&v| map[v]).collect(),
            series_parallel: check.series_parallel,
            sp_trace: check.trace.iter().map(|s| s.relabel(&to_orig)).collect(),
            kernel: check.kernel.iter().map(|&v| to_orig[v]).collect(),
            k4_witness: check.k4_witness.map(|w| K4Witness {
                branch: [
                    to_orig[w.branch[0]],
                    to_orig[w.branch[1]],
                    to_orig[w.branch[2]],
                    to_orig[w.branch[3]],
                ],
                paths: w
                    .paths
                    .iter()
                    .map(|p| p.iter().map(|&v| to_orig[v]).collect())
                    .collect(),
            }),
        });
    }
    let girth = g.chordal_girth();
    let chordal = girth.is_none();
    let epsilon = member.then(|| girth.map_or(0.0, cycle_epsilon));
    MembershipCertificate {
        member,
        chordal,
        girth,
        epsilon,
        atoms,
        separators: dec.separators().to_vec(),
    }
}

/// Expansion constant for a class member; errors on non-members.
pub fn epsilon_of_class_member(g: &Graph) -> Result<f64, RecognitionError> {
    let cert = is_in_class(g);
    if !cert.member {
        let atom = cert
            .atoms
            .iter()
            .find(|a| !a.series_parallel)
            .map(|a| a.vertices.clone())
            .unwrap_or_default();
        return Err(RecognitionError::NotInClass { atom });
    }
    Ok(cert.epsilon.unwrap())
}
