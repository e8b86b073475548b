//! Seeded instance generators.
//!
//! Every generator takes an explicit seed and is deterministic for it, so
//! test suites and command-line runs can be replayed exactly. Matrix
//! samplers produce trace-one partially positive instances; graph samplers
//! build structured families (chordal, series-parallel, clique-sum
//! members) by constructions that guarantee the property.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;
use crate::numerics::{Mat, SymmetricMatrix};
use crate::partial::PartialMatrix;

/// Eigenvalue slack used when classifying a line-search point as inside
/// the partial positivity cone.
const LINE_SEARCH_TOL: f64 = 1e-12;

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random dense PSD matrix with unit trace: a Gram matrix of uniform
/// random vectors added to the identity, then trace-normalized.
fn random_psd_perturbation(n: usize, rng: &mut ChaCha8Rng) -> SymmetricMatrix {
    let mut v = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            v[(i, j)] = rng.random_range(-1.0..1.0);
        }
    }
    let mut w = SymmetricMatrix::identity(n);
    for i in 0..n {
        for j in i..n {
            let mut dot = 0.0;
            for k in 0..n {
                dot += v[(i, k)] * v[(j, k)];
            }
            w.set(i, j, w.get(i, j) + dot);
        }
    }
    let t = w.trace();
    w.scaled(1.0 / t)
}

/// Draws a trace-one sample on the boundary of the partial positivity cone
/// of `g`.
///
/// The sample is built by projecting a random PSD perturbation of the
/// identity onto the pattern and then walking from the scaled-identity
/// center through that point until some clique block goes singular
/// (doubling to bracket, then bisection). The result is partially
/// positive with at least one nearly singular clique block.
pub fn boundary_sample(g: &Graph, seed: u64) -> PartialMatrix {
    let n = g.vertex_count();
    assert!(n >= 1, "boundary sample needs a nonempty graph");
    let mut rng = rng_for(seed);
    let center = 1.0 / n as f64;

    // point(t) = center + t * (a0 - center), entrywise on the pattern.
    let point = |a0: &PartialMatrix, t: f64| -> PartialMatrix {
        let mut p = PartialMatrix::zeros(g.clone());
        for i in 0..n {
            p.set_diag(i, center + t * (a0.diag(i) - center));
        }
        for &(u, v) in g.edges() {
            p.set_edge(u, v, t * a0.edge(u, v).unwrap());
        }
        p
    };

    loop {
        let a0 = PartialMatrix::project(&random_psd_perturbation(n, &mut rng), g);
        let dev = (0..n)
            .map(|i| (a0.diag(i) - center).abs())
            .chain(g.edges().iter().map(|&(u, v)| a0.edge(u, v).unwrap().abs()))
            .fold(0.0f64, f64::max);
        if dev < 1e-9 {
            // Degenerate draw with no direction to walk; reject it.
            continue;
        }
        let feasible = |t: f64| {
            point(&a0, t)
                .is_partially_positive(LINE_SEARCH_TOL)
                .is_positive()
        };
        // a0 itself is the projection of a PSD matrix, so t = 1 is inside.
        let mut lo = 1.0;
        let mut hi = 2.0;
        let mut bracketed = false;
        for _ in 0..60 {
            if feasible(hi) {
                lo = hi;
                hi *= 2.0;
            } else {
                bracketed = true;
                break;
            }
        }
        if !bracketed {
            continue;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return point(&a0, lo);
    }
}

/// Random rank-two-completable cycle instance: Gram data of planar
/// vectors read around `C_n`, trace-normalized.
pub fn circle_cycle_sample(n: usize, seed: u64) -> PartialMatrix {
    assert!(n >= 4, "cycle samples need n >= 4");
    let mut rng = rng_for(seed);
    let angles: Vec<f64> = (0..n)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    let radii: Vec<f64> = (0..n).map(|_| rng.random_range(0.3..1.3)).collect();
    let total: f64 = radii.iter().map(|r| r * r).sum();
    let mut a = PartialMatrix::zeros(Graph::cycle(n));
    for i in 0..n {
        a.set_diag(i, radii[i] * radii[i] / total);
    }
    for i in 0..n {
        let j = (i + 1) % n;
        let dot = radii[i] * radii[j] * (angles[i] - angles[j]).cos() / total;
        a.set_edge(i, j, dot);
    }
    a
}

/// Random extreme-ray cycle instance in normal form: positive diagonal,
/// every edge block singular, and exactly one negated edge, so no PSD
/// completion exists and bisection on the block-singular family applies.
pub fn extreme_ray_cycle_sample(n: usize, seed: u64) -> PartialMatrix {
    assert!(n >= 4, "cycle samples need n >= 4");
    let mut rng = rng_for(seed);
    let diag: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.2)).collect();
    let total: f64 = diag.iter().sum();
    let mut a = PartialMatrix::zeros(Graph::cycle(n));
    for i in 0..n {
        a.set_diag(i, diag[i] / total);
    }
    for i in 0..n {
        let j = (i + 1) % n;
        let sign = if i == 0 { -1.0 } else { 1.0 };
        a.set_edge(i, j, sign * (diag[i] * diag[j]).sqrt() / total);
    }
    a
}

/// Random connected chordal graph built by attaching each new vertex to a
/// clique of the part already built.
pub fn random_chordal(n: usize, seed: u64) -> Graph {
    assert!(n >= 1);
    let mut rng = rng_for(seed);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut g = Graph::empty(1);
    for v in 1..n {
        let anchor = rng.random_range(0..v);
        let mut clique = vec![anchor];
        let target = 1 + rng.random_range(0..3);
        let mut others: Vec<usize> = (0..v).filter(|&w| w != anchor).collect();
        others.shuffle(&mut rng);
        for w in others {
            if clique.len() >= target {
                break;
            }
            if clique.iter().all(|&c| g.has_edge(c, w)) {
                clique.push(w);
            }
        }
        for &c in &clique {
            edges.push((c, v));
        }
        g = Graph::with_edges(v + 1, &edges).expect("simplicial growth is duplicate-free");
    }
    g
}

/// Random series-parallel graph: a random 2-tree with a fraction of its
/// edges deleted. Partial 2-trees are exactly the graphs with no K4
/// minor, so the result always passes the reduction test.
pub fn random_series_parallel(n: usize, seed: u64) -> Graph {
    assert!(n >= 2);
    let mut rng = rng_for(seed);
    let mut edges: Vec<(usize, usize)> = vec![(0, 1)];
    for v in 2..n {
        let &(a, b) = &edges[rng.random_range(0..edges.len())];
        edges.push((a, v));
        edges.push((b, v));
    }
    let kept: Vec<(usize, usize)> = edges
        .into_iter()
        .filter(|_| rng.random_range(0.0..1.0) >= 0.2)
        .collect();
    Graph::with_edges(n, &kept).expect("2-tree growth is duplicate-free")
}

/// One building block for clique-sum members: chordal, series-parallel,
/// or a single or double cone over a series-parallel graph.
fn random_piece(size: usize, rng: &mut ChaCha8Rng) -> Graph {
    let kind = rng.random_range(0..4);
    match kind {
        0 => random_chordal(size, rng.random()),
        1 if size >= 2 => random_series_parallel(size, rng.random()),
        2 if size >= 3 => random_series_parallel(size - 1, rng.random()).cone(),
        3 if size >= 4 => random_series_parallel(size - 2, rng.random()).cone().cone(),
        _ => random_chordal(size, rng.random()),
    }
}

/// Picks a clique of size at most `want` from `g`, preferring exactly
/// `want` vertices of a random maximal clique.
fn random_clique(g: &Graph, want: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let cliques = g.maximal_cliques();
    let mut pick = cliques[rng.random_range(0..cliques.len())].clone();
    pick.shuffle(rng);
    pick.truncate(want.max(1));
    pick.sort_unstable();
    pick
}

/// Random member of the recognized class: a clique sum of `pieces`
/// random blocks, each chordal or a repeated cone over a series-parallel
/// graph. Membership is guaranteed by construction because the class is
/// closed under clique sums.
pub fn random_class_member(pieces: usize, seed: u64) -> Graph {
    assert!(pieces >= 1);
    let mut rng = rng_for(seed);
    let mut g = random_piece(3 + rng.random_range(0..4), &mut rng);
    for _ in 1..pieces {
        let h = random_piece(3 + rng.random_range(0..4), &mut rng);
        let want = 1 + rng.random_range(0..3);
        let host = random_clique(&g, want, &mut rng);
        let guest = random_clique(&h, host.len().min(want), &mut rng);
        let shared = host.len().min(guest.len());
        let host = &host[..shared];
        let guest = &guest[..shared];

        // Guest clique vertices land on the host clique; the rest of the
        // piece gets fresh labels.
        let gn = g.vertex_count();
        let mut relabel = vec![usize::MAX; h.vertex_count()];
        for (k, &v) in guest.iter().enumerate() {
            relabel[v] = host[k];
        }
        let mut next = gn;
        for v in 0..h.vertex_count() {
            if relabel[v] == usize::MAX {
                relabel[v] = next;
                next += 1;
            }
        }
        let mut edge_set: std::collections::BTreeSet<(usize, usize)> =
            g.edges().iter().copied().collect();
        for &(u, v) in h.edges() {
            let (a, b) = (relabel[u].min(relabel[v]), relabel[u].max(relabel[v]));
            edge_set.insert((a, b));
        }
        let edges: Vec<(usize, usize)> = edge_set.into_iter().collect();
        g = Graph::with_edges(next, &edges).expect("relabeled union stays simple");
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completion::{cycle_epsilon_bisect, is_psd_completable, rank2_cycle_feasible};
    use crate::recognition::{cycle_epsilon, is_in_class, is_series_parallel};

    fn entries_equal(a: &PartialMatrix, b: &PartialMatrix) -> bool {
        let n = a.n();
        (0..n).all(|i| a.diag(i) == b.diag(i))
            && a.graph()
                .edges()
                .iter()
                .all(|&(u, v)| a.edge(u, v) == b.edge(u, v))
    }

    #[test]
    fn boundary_sample_is_deterministic_per_seed() {
        let g = Graph::cycle(5);
        let a = boundary_sample(&g, 7);
        let b = boundary_sample(&g, 7);
        let c = boundary_sample(&g, 8);
        assert!(entries_equal(&a, &b));
        assert!(!entries_equal(&a, &c));
    }

    #[test]
    fn boundary_sample_sits_on_the_cone_boundary() {
        for (g, seed) in [
            (Graph::cycle(4), 0),
            (Graph::cycle(6), 1),
            (Graph::wheel(5), 2),
            (Graph::complete(4), 3),
            (Graph::path(6), 4),
        ] {
            let a = boundary_sample(&g, seed);
            assert!((a.trace() - 1.0).abs() < 1e-12);
            assert!(a.is_partially_positive(1e-9).is_positive());
            let min_eig = a.min_clique_eigenvalue();
            assert!(
                min_eig.abs() < 1e-6,
                "expected a nearly singular clique block, min eig {min_eig:.3e}"
            );
        }
    }

    #[test]
    fn boundary_samples_on_chordal_patterns_complete() {
        for seed in 0..5 {
            let g = random_chordal(7, seed);
            let a = boundary_sample(&g, seed + 100);
            let verdict = is_psd_completable(&a, 1e-7).unwrap();
            assert!(verdict.is_completable(), "seed {seed}");
        }
    }

    #[test]
    fn circle_samples_admit_rank_two_completions() {
        for n in 4..=8 {
            for seed in 0..5 {
                let a = circle_cycle_sample(n, seed);
                assert!((a.trace() - 1.0).abs() < 1e-12);
                assert!(a.is_partially_positive(1e-9).is_positive());
                let feas = rank2_cycle_feasible(&a, None).unwrap();
                assert!(feas.feasible, "n {n} seed {seed}");
            }
        }
    }

    #[test]
    fn extreme_ray_samples_bisect_below_the_cycle_constant() {
        for n in 4..=8 {
            for seed in 0..3 {
                let a = extreme_ray_cycle_sample(n, seed);
                assert!((a.trace() - 1.0).abs() < 1e-12);
                for i in 0..n {
                    let j = (i + 1) % n;
                    let det = a.diag(i) * a.diag(j) - a.edge(i, j).unwrap().powi(2);
                    assert!(det.abs() < 1e-12, "edge block ({i},{j}) not singular");
                }
                let eps = cycle_epsilon_bisect(&a, None).unwrap();
                assert!(eps > 0.0);
                assert!(eps <= cycle_epsilon(n) + 1e-12, "n {n} seed {seed}");
            }
        }
    }

    #[test]
    fn uniform_diagonal_extreme_ray_matches_closed_form() {
        // With a flat diagonal the sample is the worst case on the cycle.
        let mut a = extreme_ray_cycle_sample(5, 0);
        let n = 5;
        for i in 0..n {
            a.set_diag(i, 1.0 / n as f64);
        }
        for i in 0..n {
            let j = (i + 1) % n;
            let sign = if i == 0 { -1.0 } else { 1.0 };
            a.set_edge(i, j, sign / n as f64);
        }
        let eps = cycle_epsilon_bisect(&a, None).unwrap();
        assert!((eps - cycle_epsilon(5)).abs() < 1e-9);
    }

    #[test]
    fn chordal_generator_yields_connected_chordal_graphs() {
        for seed in 0..10 {
            let g = random_chordal(9, seed);
            assert!(g.is_connected(), "seed {seed}");
            assert!(g.is_chordal(), "seed {seed}");
        }
    }

    #[test]
    fn series_parallel_generator_passes_reduction() {
        for seed in 0..10 {
            let g = random_series_parallel(9, seed);
            assert!(is_series_parallel(&g).series_parallel, "seed {seed}");
        }
    }

    #[test]
    fn class_member_generator_yields_members() {
        for seed in 0..10 {
            let g = random_class_member(3, seed);
            let cert = is_in_class(&g);
            assert!(cert.member, "seed {seed}");
        }
    }
}
