//! Acceptance gate: numbered end-to-end checks with pinned tolerances.
//! Every check prints one PASS/FAIL line; the test fails if any check
//! fails. Oracles here are built independently of the library paths they
//! judge (closed forms, exhaustive searches, partition-based minor tests).

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use conedist::completion::{
    dual_epsilon, epsilon_at, is_psd_completable, numerical_rank, rank2_cycle_completion,
    rank2_cycle_feasible, Completability, CompletionResult,
};
use conedist::graph::Graph;
use conedist::numerics::{sym_eig, SymmetricMatrix};
use conedist::partial::{extremal_cycle_matrix, PartialMatrix};
use conedist::recognition::{cycle_epsilon, is_in_class};
use conedist::sampling::{
    boundary_sample, circle_cycle_sample, random_chordal, random_class_member,
};
use conedist::sdp::{
    bound_gap, decompose, maxcut_sdp, solve, solve_decomposed, SolveOptions, SolveStatus,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Interior-point tolerance for every solve in this suite; the sharpest
/// setting that converges dependably on boundary-degenerate instances,
/// and well below every acceptance threshold.
const SOLVER_TOL: f64 = 1e-8;
/// Criterion 1: closed-form agreement for extremal cycle instances.
const TOL_CLOSED_FORM: f64 = 1e-5;
/// Criteria 2, 3, 6: sampled upper bounds against the pattern constant.
const TOL_UPPER_BOUND: f64 = 1e-6;
/// Criterion 5: primal-dual agreement.
const TOL_GAP: f64 = 1e-5;
/// Criterion 5: complementary slackness residual.
const TOL_SLACKNESS: f64 = 1e-4;
/// Criterion 6: attainment of the bound by constructed instances.
const TOL_ATTAINMENT: f64 = 1e-4;
/// Criterion 7: margins of the max-cut interval.
const TOL_MAXCUT: f64 = 1e-4;
/// Criterion 9: entry reproduction by constructed rank-2 completions.
const TOL_RANK2_ENTRIES: f64 = 1e-9;
/// Criterion 9: entry agreement for the truncation cross-check.
const TOL_TRUNCATION: f64 = 1e-6;
/// Criterion 9: angle tolerance confirming a rejection is not a knife-edge
/// artifact before it counts as a disagreement.
const TOL_KNIFE_EDGE: f64 = 1e-3;
/// Criterion 10: relative lower bound on Hessian eigenvalues.
const TOL_HESSIAN: f64 = 1e-6;
/// Eigenvalue cutoff defining numerical rank in criterion 4.
const RANK_CUT: f64 = 1e-6;

const LIMIT_CRIT_1: Duration = Duration::from_secs(5);
const LIMIT_CRIT_2: Duration = Duration::from_secs(60);
const LIMIT_CRIT_8: Duration = Duration::from_secs(30);

/// Instances retained for the duality and containment checks.
#[derive(Default)]
struct Ctx {
    /// (cycle length, instance, solve result) for the extremal family.
    extremal: Vec<(usize, PartialMatrix, CompletionResult)>,
    /// (graph label, pattern bound, sample, solve result).
    samples: Vec<(&'static str, f64, PartialMatrix, CompletionResult)>,
}

#[test]
fn acceptance() {
    let mut ctx = Ctx::default();
    let mut lines: Vec<(String, bool)> = vec![];
    let record = |lines: &mut Vec<(String, bool)>,
                  label: &str,
                  limit: Option<Duration>,
                  started: Instant,
                  result: Result<String, String>| {
        let elapsed = started.elapsed();
        let result = match (result, limit) {
            (Ok(d), Some(l)) if elapsed > l => {
                Err(format!("took {elapsed:.2?}, limit {l:.2?} ({d})"))
            }
            (r, _) => r,
        };
        let ok = result.is_ok();
        let body = match &result {
            Ok(d) => format!("PASS [{elapsed:.2?}] {d}"),
            Err(d) => format!("FAIL [{elapsed:.2?}] {d}"),
        };
        let line = format!("{label}: {body}");
        println!("{line}");
        lines.push((line, ok));
    };

    let t = Instant::now();
    let r = criterion_1_cycle_closed_form(&mut ctx);
    record(
        &mut lines,
        "criterion 1 (cycle closed form)",
        Some(LIMIT_CRIT_1),
        t,
        r,
    );

    let t = Instant::now();
    let r = criterion_2_sample_upper_bounds(&mut ctx);
    record(
        &mut lines,
        "criterion 2 (sample upper bounds)",
        Some(LIMIT_CRIT_2),
        t,
        r,
    );

    let t = Instant::now();
    let r = criterion_3_chordal_exactness();
    record(&mut lines, "criterion 3 (chordal exactness)", None, t, r);

    let t = Instant::now();
    let r = criterion_4_completion_rank(&ctx);
    record(&mut lines, "criterion 4 (completion rank)", None, t, r);

    let t = Instant::now();
    let r = criterion_5_strong_duality(&ctx);
    record(&mut lines, "criterion 5 (strong duality)", None, t, r);

    let t = Instant::now();
    let r = criterion_6_gluing_and_coning();
    record(&mut lines, "criterion 6 (gluing and coning)", None, t, r);

    let t = Instant::now();
    let r = criterion_7_maxcut_interval();
    record(&mut lines, "criterion 7 (max-cut interval)", None, t, r);

    let t = Instant::now();
    let r = criterion_8_recognition_oracle();
    record(
        &mut lines,
        "criterion 8 (recognition vs oracle)",
        Some(LIMIT_CRIT_8),
        t,
        r,
    );

    let t = Instant::now();
    let r = criterion_9_rank2_agreement();
    record(
        &mut lines,
        "criterion 9 (rank-2 cycle agreement)",
        None,
        t,
        r,
    );

    let t = Instant::now();
    let r = criterion_10_arccos_convexity();
    record(&mut lines, "criterion 10 (arccos convexity)", None, t, r);

    let t = Instant::now();
    let r = containment_property(&ctx);
    record(&mut lines, "supplementary (shift containment)", None, t, r);

    let failed: Vec<&String> = lines
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(line, _)| line)
        .collect();
    assert!(
        failed.is_empty(),
        "acceptance failures:\n{}",
        failed
            .iter()
            .map(|s| s.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    );
}

fn criterion_1_cycle_closed_form(ctx: &mut Ctx) -> Result<String, String> {
    let mut worst = 0.0f64;
    for n in 4..=10 {
        let a = extremal_cycle_matrix(n);
        let r = epsilon_at(&a, SOLVER_TOL).map_err(|e| format!("n={n}: {e}"))?;
        let dev = (r.epsilon - cycle_epsilon(n)).abs();
        worst = worst.max(dev);
        if dev > TOL_CLOSED_FORM {
            return Err(format!(
                "n={n}: deviation {dev:.3e} above {TOL_CLOSED_FORM:.0e}"
            ));
        }
        ctx.extremal.push((n, a, r));
    }
    Ok(format!("n=4..10, worst closed-form deviation {worst:.2e}"))
}

fn criterion_2_sample_upper_bounds(ctx: &mut Ctx) -> Result<String, String> {
    let suite: Vec<(&'static str, Graph, usize)> = vec![
        ("C4", Graph::cycle(4), 4),
        ("C5", Graph::cycle(5), 5),
        ("C6", Graph::cycle(6), 6),
        ("C7", Graph::cycle(7), 7),
        ("C8", Graph::cycle(8), 8),
        ("W4", Graph::wheel(4), 4),
        ("W5", Graph::wheel(5), 5),
        ("W6", Graph::wheel(6), 6),
    ];
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0usize;
    for (label, g, girth) in suite {
        let bound = cycle_epsilon(girth);
        for seed in 0..100u64 {
            let a = boundary_sample(&g, 20_000 + seed);
            if (a.trace() - 1.0).abs() > 1e-9 {
                return Err(format!("{label} seed {seed}: sample trace off one"));
            }
            let r = epsilon_at(&a, SOLVER_TOL).map_err(|e| format!("{label} seed {seed}: {e}"))?;
            let margin = r.epsilon - bound;
            worst = worst.max(margin);
            if margin > TOL_UPPER_BOUND {
                return Err(format!(
                    "{label} seed {seed}: epsilon {:.9} above bound {:.9}",
                    r.epsilon, bound
                ));
            }
            count += 1;
            ctx.samples.push((label, bound, a, r));
        }
    }
    Ok(format!(
        "{count} samples over 8 graphs, max epsilon minus bound {worst:.2e}"
    ))
}

fn criterion_3_chordal_exactness() -> Result<String, String> {
    let mut count = 0usize;
    let mut worst = 0.0f64;
    for k in 0..5u64 {
        let n = 6 + k as usize;
        let g = random_chordal(n, 30_000 + k);
        for seed in 0..20u64 {
            let a = boundary_sample(&g, 31_000 + 100 * k + seed);
            let verdict =
                is_psd_completable(&a, 1e-7).map_err(|e| format!("graph {k} seed {seed}: {e}"))?;
            if !verdict.is_completable() {
                return Err(format!(
                    "graph {k} seed {seed}: chordal sample not completable"
                ));
            }
            let r =
                epsilon_at(&a, SOLVER_TOL).map_err(|e| format!("graph {k} seed {seed}: {e}"))?;
            worst = worst.max(r.epsilon);
            if r.epsilon > TOL_UPPER_BOUND {
                return Err(format!(
                    "graph {k} seed {seed}: epsilon {:.3e} nonzero",
                    r.epsilon
                ));
            }
            count += 1;
        }
    }
    Ok(format!(
        "{count} samples over 5 chordal graphs, max epsilon {worst:.2e}"
    ))
}

fn criterion_4_completion_rank(ctx: &Ctx) -> Result<String, String> {
    for (n, _, r) in &ctx.extremal {
        if r.epsilon <= 0.0 {
            return Err(format!(
                "n={n}: extremal instance lost positivity of epsilon"
            ));
        }
        let rank = numerical_rank(&r.completion, RANK_CUT);
        if rank > 2 {
            return Err(format!("n={n}: completion rank {rank} above 2"));
        }
    }
    Ok(format!(
        "{} extremal completions, all rank <= 2",
        ctx.extremal.len()
    ))
}

fn criterion_5_strong_duality(ctx: &Ctx) -> Result<String, String> {
    let mut worst_gap = 0.0f64;
    let mut worst_slack = 0.0f64;
    let mut check = |tag: String, r: &CompletionResult| -> Result<(), String> {
        let gap = (r.certificate_value - r.raw_epsilon).abs();
        worst_gap = worst_gap.max(gap);
        if gap > TOL_GAP {
            return Err(format!("{tag}: primal-dual gap {gap:.3e}"));
        }
        // Slackness pairs the certificate with the unshifted optimizer.
        let raw_completion = r.completion.shifted(r.raw_epsilon - r.epsilon);
        let slack = r
            .certificate
            .to_mat()
            .mul(&raw_completion.to_mat())
            .frobenius_norm();
        worst_slack = worst_slack.max(slack);
        if slack > TOL_SLACKNESS {
            return Err(format!("{tag}: slackness residual {slack:.3e}"));
        }
        Ok(())
    };
    for (n, _, r) in &ctx.extremal {
        check(format!("extremal n={n}"), r)?;
    }
    for (label, _, _, r) in &ctx.samples {
        check(format!("sample {label}"), r)?;
    }
    // Independent dual solves on the extremal family.
    for (n, a, r) in &ctx.extremal {
        let (value, _y) = dual_epsilon(a, SOLVER_TOL).map_err(|e| format!("n={n}: {e}"))?;
        let dev = (value - r.raw_epsilon).abs();
        if dev > TOL_GAP {
            return Err(format!("n={n}: independent dual off by {dev:.3e}"));
        }
    }
    Ok(format!(
        "{} instances, worst gap {worst_gap:.2e}, worst slackness {worst_slack:.2e}",
        ctx.extremal.len() + ctx.samples.len()
    ))
}

/// Copies the extremal cycle values onto the first `cycle` vertices of a
/// larger pattern and zero-fills the rest, keeping trace one.
fn embed_extremal_cycle(g: &Graph, cycle: usize) -> PartialMatrix {
    let ext = extremal_cycle_matrix(cycle);
    let mut a = PartialMatrix::zeros(g.clone());
    for i in 0..cycle {
        a.set_diag(i, ext.diag(i));
    }
    for &(u, v) in ext.graph().edges() {
        a.set_edge(u, v, ext.edge(u, v).unwrap());
    }
    a
}

fn criterion_6_gluing_and_coning() -> Result<String, String> {
    let bound = cycle_epsilon(5);

    // A five-cycle and a triangle sharing the edge {0, 1}.
    let glued =
        Graph::with_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (0, 5), (1, 5)]).unwrap();
    let cert = is_in_class(&glued);
    if !cert.member || cert.girth != Some(5) {
        return Err("glued test graph misclassified".to_string());
    }
    for seed in 0..50u64 {
        let a = boundary_sample(&glued, 60_000 + seed);
        let r = epsilon_at(&a, SOLVER_TOL).map_err(|e| format!("glued seed {seed}: {e}"))?;
        if r.epsilon > bound + TOL_UPPER_BOUND {
            return Err(format!(
                "glued seed {seed}: epsilon {:.9} above {bound:.9}",
                r.epsilon
            ));
        }
    }
    let a = embed_extremal_cycle(&glued, 5);
    let r = epsilon_at(&a, SOLVER_TOL).map_err(|e| format!("glued attainment: {e}"))?;
    let glue_dev = (r.epsilon - bound).abs();
    if glue_dev > TOL_ATTAINMENT {
        return Err(format!("glued attainment off by {glue_dev:.3e}"));
    }

    // The cone over the five-cycle (rim 0..4, apex 5).
    let wheel = Graph::wheel(5);
    for seed in 0..50u64 {
        let a = boundary_sample(&wheel, 61_000 + seed);
        let r = epsilon_at(&a, SOLVER_TOL).map_err(|e| format!("cone seed {seed}: {e}"))?;
        if r.epsilon > bound + TOL_UPPER_BOUND {
            return Err(format!(
                "cone seed {seed}: epsilon {:.9} above {bound:.9}",
                r.epsilon
            ));
        }
    }
    let a = embed_extremal_cycle(&wheel, 5);
    let r = epsilon_at(&a, SOLVER_TOL).map_err(|e| format!("cone attainment: {e}"))?;
    let cone_dev = (r.epsilon - bound).abs();
    if cone_dev > TOL_ATTAINMENT {
        return Err(format!("cone attainment off by {cone_dev:.3e}"));
    }

    Ok(format!(
        "100 samples bounded, attainment deviations {glue_dev:.2e} and {cone_dev:.2e}"
    ))
}

/// Ten-vertex clique-sum member: the wheel over a five-cycle glued to a
/// complete graph along the edge {4, 5}.
fn ten_vertex_member() -> Graph {
    let mut edges: Vec<(usize, usize)> = Graph::wheel(5).edges().to_vec();
    let six: Vec<usize> = vec![4, 5, 6, 7, 8, 9];
    for (a, &u) in six.iter().enumerate() {
        for &v in &six[a + 1..] {
            if !(u == 4 && v == 5) {
                edges.push((u, v));
            }
        }
    }
    Graph::with_edges(10, &edges).unwrap()
}

fn criterion_7_maxcut_interval() -> Result<String, String> {
    let cases: Vec<(&str, Graph)> = vec![
        ("C5", Graph::cycle(5)),
        ("C7", Graph::cycle(7)),
        ("W5", Graph::wheel(5)),
        ("ten-vertex member", ten_vertex_member()),
    ];
    let opts = SolveOptions::with_tol(SOLVER_TOL);
    let mut worst_margin = f64::INFINITY;
    for (label, g) in cases {
        let s = maxcut_sdp(&g).map_err(|e| format!("{label}: {e}"))?;
        let full = solve(&s, &opts).map_err(|e| format!("{label}: {e}"))?;
        if full.status != SolveStatus::Optimal {
            return Err(format!("{label}: full solve {:?}", full.status));
        }
        let relaxed =
            solve_decomposed(&decompose(&s), &opts).map_err(|e| format!("{label}: {e}"))?;
        if relaxed.status != SolveStatus::Optimal {
            return Err(format!("{label}: decomposed solve {:?}", relaxed.status));
        }
        let cert = is_in_class(&g);
        let eps = cert
            .epsilon
            .ok_or_else(|| format!("{label}: not a member"))?;
        let trace_b0 = s.objective().trace();
        if trace_b0 != 0.0 {
            return Err(format!("{label}: objective trace {trace_b0} not zero"));
        }
        let interval = bound_gap(relaxed.value, eps, trace_b0, g.vertex_count())
            .map_err(|e| format!("{label}: {e}"))?;
        let lower_margin = full.value - interval.lower;
        let upper_margin = interval.upper - full.value;
        worst_margin = worst_margin.min(lower_margin).min(upper_margin);
        if lower_margin < -TOL_MAXCUT || upper_margin < -TOL_MAXCUT {
            return Err(format!(
                "{label}: value {:.9} outside [{:.9}, {:.9}]",
                full.value, interval.lower, interval.upper
            ));
        }
        if label == "C5" {
            let dev = (full.value - (-4.0450850)).abs();
            if dev > TOL_MAXCUT {
                return Err(format!(
                    "C5 full value {:.9} off the oracle by {dev:.3e}",
                    full.value
                ));
            }
        }
    }
    Ok(format!(
        "4 graphs, worst interval margin {worst_margin:.2e}"
    ))
}

// ---- criterion 8 machinery: canonical enumeration and an independent
// membership oracle (any-separator recursion plus a partition-based
// K4-minor test) ----

fn all_perms(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    let mut cur: Vec<usize> = (0..n).collect();
    // Heap's algorithm, iterative.
    let mut c = vec![0usize; n];
    out.push(cur.clone());
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                cur.swap(0, i);
            } else {
                cur.swap(c[i], i);
            }
            out.push(cur.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn pair_list(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = vec![];
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    pairs
}

/// One remap table per permutation: entry `k` is the pair index that pair
/// `k` lands on after relabeling.
fn perm_pair_tables(n: usize) -> Vec<Vec<usize>> {
    let pairs = pair_list(n);
    let index = |i: usize, j: usize| -> usize {
        let (a, b) = (i.min(j), i.max(j));
        pairs.iter().position(|&p| p == (a, b)).unwrap()
    };
    all_perms(n)
        .iter()
        .map(|p| pairs.iter().map(|&(i, j)| index(p[i], p[j])).collect())
        .collect()
}

fn remap(code: u32, table: &[usize]) -> u32 {
    let mut out = 0u32;
    for (k, &target) in table.iter().enumerate() {
        if code & (1 << k) != 0 {
            out |= 1 << target;
        }
    }
    out
}

fn canon(code: u32, tables: &[Vec<usize>]) -> u32 {
    tables.iter().map(|t| remap(code, t)).min().unwrap()
}

/// Canonical edge codes for every graph on 1..=max_n vertices, one per
/// isomorphism class, grown by vertex extension.
fn canonical_graphs(max_n: usize) -> Vec<(usize, Vec<u32>)> {
    let mut levels: Vec<(usize, Vec<u32>)> = vec![(1, vec![0u32])];
    for n in 2..=max_n {
        let tables = perm_pair_tables(n);
        let prev_pairs = pair_list(n - 1);
        let cur_pairs = pair_list(n);
        let cur_index =
            |i: usize, j: usize| -> usize { cur_pairs.iter().position(|&p| p == (i, j)).unwrap() };
        let mut set: BTreeSet<u32> = BTreeSet::new();
        let prev = &levels[n - 2].1;
        for &base in prev {
            let mut embedded = 0u32;
            for (k, &(i, j)) in prev_pairs.iter().enumerate() {
                if base & (1 << k) != 0 {
                    embedded |= 1 << cur_index(i, j);
                }
            }
            for mask in 0..(1u32 << (n - 1)) {
                let mut code = embedded;
                for i in 0..(n - 1) {
                    if mask & (1 << i) != 0 {
                        code |= 1 << cur_index(i, n - 1);
                    }
                }
                set.insert(canon(code, &tables));
            }
        }
        levels.push((n, set.into_iter().collect()));
    }
    levels
}

fn graph_from_code(n: usize, code: u32) -> Graph {
    let pairs = pair_list(n);
    let edges: Vec<(usize, usize)> = pairs
        .iter()
        .enumerate()
        .filter_map(|(k, &p)| (code & (1 << k) != 0).then_some(p))
        .collect();
    Graph::with_edges(n, &edges).unwrap()
}

fn connected_within(g: &Graph, verts: &[usize]) -> bool {
    if verts.is_empty() {
        return false;
    }
    let mut seen = vec![false; g.vertex_count()];
    let inside = |v: usize| verts.contains(&v);
    let mut stack = vec![verts[0]];
    seen[verts[0]] = true;
    let mut found = 1;
    while let Some(v) = stack.pop() {
        for w in g.neighbors(v) {
            if inside(w) && !seen[w] {
                seen[w] = true;
                found += 1;
                stack.push(w);
            }
        }
    }
    found == verts.len()
}

fn blocks_adjacent(g: &Graph, a: &[usize], b: &[usize]) -> bool {
    a.iter().any(|&u| b.iter().any(|&v| g.has_edge(u, v)))
}

/// Partition-based minor test: four disjoint nonempty connected blocks,
/// pairwise joined by an edge.
fn has_k4_minor(g: &Graph) -> bool {
    let n = g.vertex_count();
    if n < 4 {
        return false;
    }
    let total = 5usize.pow(n as u32);
    'outer: for idx in 0..total {
        let mut rest = idx;
        let mut blocks: [Vec<usize>; 4] = [vec![], vec![], vec![], vec![]];
        for v in 0..n {
            let d = rest % 5;
            rest /= 5;
            if d < 4 {
                blocks[d].push(v);
            }
        }
        if blocks.iter().any(|b| b.is_empty()) {
            continue;
        }
        if !blocks.iter().all(|b| connected_within(g, b)) {
            continue;
        }
        for p in 0..4 {
            for q in (p + 1)..4 {
                if !blocks_adjacent(g, &blocks[p], &blocks[q]) {
                    continue 'outer;
                }
            }
        }
        return true;
    }
    false
}

fn components_within(g: &Graph, verts: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.vertex_count()];
    let inside = |v: usize| verts.contains(&v);
    let mut comps = vec![];
    for &start in verts {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for w in g.neighbors(v) {
                if inside(w) && !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

fn oracle_connected(g: &Graph) -> bool {
    let n = g.vertex_count();
    if n <= 1 {
        return true;
    }
    // First clique separator found, in plain bitmask order; any choice
    // yields the same verdict because the class closes under clique sums
    // and induced subgraphs.
    for s_mask in 1u32..((1 << n) - 1) {
        let s: Vec<usize> = (0..n).filter(|&v| s_mask & (1 << v) != 0).collect();
        if !g.is_clique(&s) {
            continue;
        }
        let rest: Vec<usize> = (0..n).filter(|&v| s_mask & (1 << v) == 0).collect();
        let comps = components_within(g, &rest);
        if comps.len() >= 2 {
            return comps.into_iter().all(|mut part| {
                part.extend(&s);
                part.sort_unstable();
                let (sub, _) = g.induced_subgraph(&part).unwrap();
                oracle_connected(&sub)
            });
        }
    }
    // Atom: strip universal vertices, then demand no K4 minor.
    let mut h = g.clone();
    loop {
        let m = h.vertex_count();
        if m == 0 {
            break;
        }
        match (0..m).find(|&v| h.degree(v) == m - 1) {
            Some(v) => {
                let keep: Vec<usize> = (0..m).filter(|&u| u != v).collect();
                h = h.induced_subgraph(&keep).unwrap().0;
            }
            None => break,
        }
    }
    !has_k4_minor(&h)
}

fn oracle_member(g: &Graph) -> bool {
    g.components().iter().all(|comp| {
        let (sub, _) = g.induced_subgraph(comp).unwrap();
        oracle_connected(&sub)
    })
}

fn criterion_8_recognition_oracle() -> Result<String, String> {
    // Wheels are members.
    for rim in 4..=8 {
        if !is_in_class(&Graph::wheel(rim)).member {
            return Err(format!("wheel over C{rim} rejected"));
        }
    }
    // Random clique sums of chordal and coned series-parallel pieces.
    for seed in 0..20u64 {
        let g = random_class_member(3, 80_000 + seed);
        if !is_in_class(&g).member {
            return Err(format!("random clique-sum member seed {seed} rejected"));
        }
    }
    // Known non-members: the bipartite obstruction alone, joined with one
    // or two universal vertices, and glued to a triangle.
    let k33 = Graph::with_edges(
        6,
        &[
            (0, 3),
            (0, 4),
            (0, 5),
            (1, 3),
            (1, 4),
            (1, 5),
            (2, 3),
            (2, 4),
            (2, 5),
        ],
    )
    .unwrap();
    let mut with_triangle: Vec<(usize, usize)> = k33.edges().to_vec();
    with_triangle.push((0, 6));
    with_triangle.push((3, 6));
    let rejects: Vec<(&str, Graph)> = vec![
        ("K33", k33.clone()),
        ("K33 cone", k33.cone()),
        ("K33 double cone", k33.cone().cone()),
        (
            "K33 with triangle",
            Graph::with_edges(7, &with_triangle).unwrap(),
        ),
    ];
    for (label, g) in rejects {
        if is_in_class(&g).member {
            return Err(format!("{label} accepted"));
        }
    }

    // Exhaustive comparison on all graphs with at most 7 vertices, one
    // representative per isomorphism class.
    let levels = canonical_graphs(7);
    let counts: Vec<usize> = levels.iter().map(|(_, codes)| codes.len()).collect();
    if counts != vec![1, 2, 4, 11, 34, 156, 1044] {
        return Err(format!("canonical enumeration produced counts {counts:?}"));
    }
    let mut compared = 0usize;
    for (n, codes) in &levels {
        for &code in codes {
            let g = graph_from_code(*n, code);
            let lib = is_in_class(&g).member;
            let orc = oracle_member(&g);
            if lib != orc {
                return Err(format!("n={n} code {code:#x}: library {lib}, oracle {orc}"));
            }
            compared += 1;
        }
    }

    // Relabeling invariance on random 7-vertex classes.
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let seven = &levels[6].1;
    for _ in 0..30 {
        let code = seven[rng.random_range(0..seven.len())];
        let g = graph_from_code(7, code);
        let mut perm: Vec<usize> = (0..7).collect();
        perm.shuffle(&mut rng);
        let edges: Vec<(usize, usize)> =
            g.edges().iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        let h = Graph::with_edges(7, &edges).unwrap();
        if is_in_class(&g).member != is_in_class(&h).member {
            return Err(format!("code {code:#x}: relabeling changed the verdict"));
        }
    }

    Ok(format!(
        "{compared} isomorphism classes vs oracle, wheels, 20 clique sums, 4 rejections, 30 relabelings"
    ))
}

fn entries_match(a: &PartialMatrix, m: &SymmetricMatrix, tol: f64) -> bool {
    let n = a.n();
    (0..n).all(|i| (m.get(i, i) - a.diag(i)).abs() <= tol)
        && a.graph()
            .edges()
            .iter()
            .all(|&(u, v)| (m.get(u, v) - a.edge(u, v).unwrap()).abs() <= tol)
}

/// Keeps the two largest eigenvalues (clamped at zero) of a completion.
fn rank2_truncate(m: &SymmetricMatrix) -> SymmetricMatrix {
    let eig = sym_eig(m).unwrap();
    let n = m.n();
    let mut out = SymmetricMatrix::zeros(n);
    for idx in [n.saturating_sub(1), n.saturating_sub(2)] {
        let lambda = eig.values[idx].max(0.0);
        for i in 0..n {
            for j in i..n {
                out.set(
                    i,
                    j,
                    out.get(i, j) + lambda * eig.vectors[(i, idx)] * eig.vectors[(j, idx)],
                );
            }
        }
    }
    out
}

fn verify_rank2_witness(a: &PartialMatrix, signs: &[i8], winding: i64) -> Result<(), String> {
    let m = rank2_cycle_completion(a, signs, winding, None).map_err(|e| e.to_string())?;
    if !entries_match(a, &m, TOL_RANK2_ENTRIES) {
        return Err("constructed completion misses specified entries".to_string());
    }
    let eig = sym_eig(&m).map_err(|e| e.to_string())?;
    if eig.min() < -1e-8 {
        return Err(format!(
            "constructed completion has eigenvalue {:.3e}",
            eig.min()
        ));
    }
    if numerical_rank(&m, RANK_CUT) > 2 {
        return Err("constructed completion exceeds rank 2".to_string());
    }
    Ok(())
}

fn criterion_9_rank2_agreement() -> Result<String, String> {
    let mut feasible_count = 0usize;
    let mut infeasible_count = 0usize;
    for n in 4..=8usize {
        for seed in 0..20u64 {
            // Constructed planar Gram data must be recognized and
            // reconstructed exactly.
            let a = circle_cycle_sample(n, 90_000 + 100 * n as u64 + seed);
            let feas = rank2_cycle_feasible(&a, None)
                .map_err(|e| format!("circle n={n} seed {seed}: {e}"))?;
            if !feas.feasible {
                return Err(format!(
                    "circle n={n} seed {seed}: constructed instance rejected (residual {:.3e})",
                    feas.residual
                ));
            }
            verify_rank2_witness(&a, feas.signs.as_ref().unwrap(), feas.winding.unwrap())
                .map_err(|e| format!("circle n={n} seed {seed}: {e}"))?;
            match is_psd_completable(&a, 1e-7)
                .map_err(|e| format!("circle n={n} seed {seed}: {e}"))?
            {
                Completability::Completable { .. } => {}
                Completability::NotCompletable { .. } => {
                    return Err(format!(
                        "circle n={n} seed {seed}: SDP disagrees on completability"
                    ));
                }
            }
            feasible_count += 1;

            // Generic boundary data: the search verdict must be
            // constructively sound, and rejections must survive the
            // truncation cross-check.
            let b = boundary_sample(&Graph::cycle(n), 95_000 + 100 * n as u64 + seed);
            let feas = rank2_cycle_feasible(&b, None)
                .map_err(|e| format!("generic n={n} seed {seed}: {e}"))?;
            if feas.feasible {
                verify_rank2_witness(&b, feas.signs.as_ref().unwrap(), feas.winding.unwrap())
                    .map_err(|e| format!("generic n={n} seed {seed}: {e}"))?;
                feasible_count += 1;
            } else {
                if let Completability::Completable { completion } = is_psd_completable(&b, 1e-7)
                    .map_err(|e| format!("generic n={n} seed {seed}: {e}"))?
                {
                    let t = rank2_truncate(&completion);
                    if entries_match(&b, &t, TOL_TRUNCATION) {
                        // The truncation matches: only a disagreement if the
                        // search still rejects with generous angle slack.
                        let loose = rank2_cycle_feasible(&b, Some(TOL_KNIFE_EDGE))
                            .map_err(|e| format!("generic n={n} seed {seed}: {e}"))?;
                        if !loose.feasible {
                            return Err(format!(
                                "generic n={n} seed {seed}: truncated SDP completion is rank-2 feasible but the search said no"
                            ));
                        }
                    }
                }
                infeasible_count += 1;
            }
        }
    }
    Ok(format!(
        "200 instances, {feasible_count} feasible verified, {infeasible_count} rejections cross-checked"
    ))
}

fn criterion_10_arccos_convexity() -> Result<String, String> {
    let f = |x: f64, y: f64, e: f64| -> f64 {
        ((x * y) / ((x + e) * (y + e)))
            .sqrt()
            .clamp(-1.0, 1.0)
            .acos()
    };
    let h = 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(10_101);
    let mut worst = f64::INFINITY;
    for k in 0..100 {
        let x = rng.random_range(0.1..10.0);
        let y = rng.random_range(0.1..10.0);
        let e = rng.random_range(0.0..1.0);
        let fxx = (f(x + h, y, e) - 2.0 * f(x, y, e) + f(x - h, y, e)) / (h * h);
        let fyy = (f(x, y + h, e) - 2.0 * f(x, y, e) + f(x, y - h, e)) / (h * h);
        let fxy = (f(x + h, y + h, e) - f(x + h, y - h, e) - f(x - h, y + h, e)
            + f(x - h, y - h, e))
            / (4.0 * h * h);
        let mean = 0.5 * (fxx + fyy);
        let min_eig = mean - (0.25 * (fxx - fyy).powi(2) + fxy * fxy).sqrt();
        let scale = fxx.abs().max(fyy.abs()).max(fxy.abs()).max(1.0);
        let rel = min_eig / scale;
        worst = worst.min(rel);
        if rel < -TOL_HESSIAN {
            return Err(format!(
                "point {k} (x={x:.3}, y={y:.3}, e={e:.3}): relative eigenvalue {rel:.3e}"
            ));
        }
    }
    Ok(format!(
        "100 Hessians, worst relative eigenvalue {worst:.2e}"
    ))
}

/// Scaled-shift containment: pushing any sample by the pattern constant
/// and renormalizing the trace lands inside the completable cone.
fn containment_property(ctx: &Ctx) -> Result<String, String> {
    let mut count = 0usize;
    let check = |tag: String, a: &PartialMatrix, eps: f64| -> Result<(), String> {
        let n = a.n() as f64;
        let shifted = a.shifted(eps).scaled(1.0 / (1.0 + n * eps));
        if (shifted.trace() - 1.0).abs() > 1e-9 {
            return Err(format!(
                "{tag}: shifted trace {:.12} off one",
                shifted.trace()
            ));
        }
        match is_psd_completable(&shifted, 1e-6).map_err(|e| format!("{tag}: {e}"))? {
            Completability::Completable { .. } => Ok(()),
            Completability::NotCompletable { violation, .. } => Err(format!(
                "{tag}: shifted sample not completable (violation {violation:.3e})"
            )),
        }
    };
    for (n, a, _) in &ctx.extremal {
        check(format!("extremal n={n}"), a, cycle_epsilon(*n))?;
        count += 1;
    }
    for (label, bound, a, _) in &ctx.samples {
        check(format!("sample {label}"), a, *bound)?;
        count += 1;
    }
    Ok(format!(
        "{count} instances recentered into the completable cone"
    ))
}
