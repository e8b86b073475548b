//! Command-line front end: graph analysis, conical distance of partial
//! matrices, decomposed SDP solves with certified bounds, the rescaled
//! max-cut relaxation, and seeded instance sampling.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use conedist::completion::{epsilon_at, CompletionError};
use conedist::graph::Graph;
use conedist::numerics::format_sig10 as sig10;
use conedist::partial::PartialMatrix;
use conedist::recognition::{is_in_class, MembershipCertificate};
use conedist::sampling::boundary_sample;
use conedist::sdp::{
    bound_gap, decompose, maxcut_sdp, solve, solve_decomposed, SolveOptions, SolveStatus, SparseSdp,
};

const EXIT_PARSE: u8 = 2;
const EXIT_NON_MEMBER: u8 = 3;
const EXIT_PRECONDITION: u8 = 4;
const EXIT_NO_CONVERGENCE: u8 = 5;

#[derive(Parser)]
#[command(
    name = "conedist",
    version,
    about = "PSD completion distances, class recognition, and decomposed SDP bounds"
)]
struct Cli {
    /// Solver tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report class membership, atoms, and the pattern constant of a graph.
    Analyze {
        /// Graph file (`n m` header, one `u v` edge per line).
        graph: PathBuf,
    },
    /// Minimal diagonal shift making a partial matrix PSD-completable.
    Epsilon {
        /// Graph file giving the sparsity pattern.
        graph: PathBuf,
        /// Matrix file (`n` header, one `i j value` entry per line).
        matrix: PathBuf,
    },
    /// Solve an SDP both whole and clique-decomposed and bound the gap.
    Decompose {
        /// SDP file (`n k` header, `l i j v` entries, `rhs`, optional `trace 1`).
        sdp: PathBuf,
        /// Verify that identity/n satisfies the constraints and print the
        /// recovered bound interval.
        #[arg(long)]
        assert_identity_feasible: bool,
    },
    /// Emit the rescaled max-cut relaxation of a graph and solve it.
    Maxcut {
        /// Graph file.
        graph: PathBuf,
        /// Where to write the generated SDP file (default: input path with
        /// the extension replaced by `.sdp`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a seeded boundary sample of the partial positivity cone.
    Sample {
        /// Graph file giving the sparsity pattern.
        graph: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn round_sig10(x: f64) -> f64 {
    sig10(x).parse().unwrap_or(x)
}

/// Rounds every float in a JSON tree to the same ten significant digits
/// the text renderer uses, so both modes report identical values.
fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => json!(round_sig10(f)),
            _ => Value::Number(n),
        },
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect())
        }
        other => other,
    }
}

fn emit_json(v: Value) {
    println!("{}", serde_json::to_string_pretty(&round_json(v)).unwrap());
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn parse_graph(path: &Path) -> Result<Graph, Failure> {
    Graph::parse(&read(path)?).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn join(v: &[usize]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn check_status(label: &str, status: SolveStatus) -> Result<(), Failure> {
    match status {
        SolveStatus::Optimal => Ok(()),
        other => Err(fail(
            EXIT_NO_CONVERGENCE,
            format!("{label} did not converge: {other:?}"),
        )),
    }
}

fn main() -> ExitCode {
    // Die quietly when a downstream consumer closes the pipe.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Analyze { graph } => cmd_analyze(graph, cli.json),
        Command::Epsilon { graph, matrix } => cmd_epsilon(graph, matrix, cli.tol, cli.json),
        Command::Decompose {
            sdp,
            assert_identity_feasible,
        } => cmd_decompose(sdp, cli.tol, cli.json, *assert_identity_feasible),
        Command::Maxcut { graph, out } => cmd_maxcut(graph, out.as_deref(), cli.tol, cli.json),
        Command::Sample { graph } => cmd_sample(graph, cli.seed, cli.json),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn summary_line(cert: &MembershipCertificate) -> String {
    if !cert.member {
        match cert.atoms.iter().find(|a| !a.series_parallel) {
            Some(a) => format!("non-member, offending atom {}", join(&a.vertices)),
            None => "non-member".to_string(),
        }
    } else if cert.chordal {
        "member (chordal), epsilon 0".to_string()
    } else {
        format!(
            "member, girth {}, epsilon {}",
            cert.girth.unwrap(),
            sig10(cert.epsilon.unwrap())
        )
    }
}

fn cert_json(cert: &MembershipCertificate) -> Value {
    json!({
        "member": cert.member,
        "chordal": cert.chordal,
        "girth": cert.girth,
        "epsilon": cert.epsilon,
        "atoms": cert.atoms.iter().map(|a| json!({
            "vertices": a.vertices,
            "peeled": a.peeled,
            "series_parallel": a.series_parallel,
            "kernel": a.kernel,
            "k4_witness": a.k4_witness.as_ref().map(|w| json!({
                "branch": w.branch,
                "paths": w.paths,
            })),
        })).collect::<Vec<_>>(),
        "separators": cert.separators,
    })
}

fn cmd_analyze(path: &Path, json_mode: bool) -> Result<u8, Failure> {
    let g = parse_graph(path)?;
    let cert = is_in_class(&g);
    if json_mode {
        emit_json(cert_json(&cert));
    } else {
        println!("{}", summary_line(&cert));
        print!("{}", cert.to_text());
    }
    Ok(if cert.member { 0 } else { EXIT_NON_MEMBER })
}

fn completion_failure(e: CompletionError) -> Failure {
    match e {
        CompletionError::SolverDidNotConverge { .. } => fail(EXIT_NO_CONVERGENCE, e.to_string()),
        other => fail(EXIT_PRECONDITION, other.to_string()),
    }
}

fn cmd_epsilon(
    graph_path: &Path,
    matrix_path: &Path,
    tol: f64,
    json_mode: bool,
) -> Result<u8, Failure> {
    let g = parse_graph(graph_path)?;
    let text = read(matrix_path)?;
    let a = PartialMatrix::parse(&text, Some(&g))
        .map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", matrix_path.display())))?;
    let res = epsilon_at(&a, tol).map_err(completion_failure)?;
    if json_mode {
        emit_json(serde_json::to_value(&res).unwrap());
    } else {
        println!("epsilon {}", sig10(res.epsilon));
        println!("raw epsilon {}", sig10(res.raw_epsilon));
        println!("dual value {}", sig10(res.certificate_value));
        println!("gap {}", sig10(res.gap));
        println!("completion rank {}", res.rank);
        println!("iterations {}", res.iterations);
    }
    Ok(0)
}

/// Whether `identity / n` satisfies every constraint row, which is the
/// precondition for recovering a two-sided bound from the relaxed value.
fn identity_feasible(s: &SparseSdp) -> bool {
    let n = s.n() as f64;
    s.constraints()
        .iter()
        .all(|(m, b)| (m.trace() / n - b).abs() <= 1e-8 * (1.0 + b.abs()))
}

fn decompose_report(
    s: &SparseSdp,
    tol: f64,
    json_mode: bool,
    assert_identity: bool,
) -> Result<u8, Failure> {
    let opts = SolveOptions::with_tol(tol);
    let full = solve(s, &opts).map_err(|e| fail(EXIT_PRECONDITION, e.to_string()))?;
    check_status("full solve", full.status)?;
    let dec = decompose(s);
    let relaxed =
        solve_decomposed(&dec, &opts).map_err(|e| fail(EXIT_PRECONDITION, e.to_string()))?;
    check_status("decomposed solve", relaxed.status)?;

    let cert = is_in_class(&s.sparsity_graph());
    let eps = if cert.member { cert.epsilon } else { None };
    let identity_ok = assert_identity.then(|| identity_feasible(s));

    let mut exit = 0u8;
    let mut suppressed: Option<String> = None;
    let bound = match (identity_ok, eps) {
        (Some(true), Some(e)) => Some(
            bound_gap(relaxed.value, e, s.objective().trace(), s.n())
                .map_err(|err| fail(EXIT_PRECONDITION, err.to_string()))?,
        ),
        (Some(false), _) => {
            exit = EXIT_PRECONDITION;
            suppressed = Some("identity/n is not feasible for the constraints".to_string());
            None
        }
        (None, _) => {
            suppressed = Some("pass --assert-identity-feasible to recover the bound".to_string());
            None
        }
        (Some(true), None) => {
            suppressed =
                Some("sparsity graph is outside the recognized class, epsilon unknown".to_string());
            None
        }
    };
    let contained = bound.map(|b| full.value >= b.lower - tol && full.value <= b.upper + tol);

    if json_mode {
        emit_json(json!({
            "full_value": full.value,
            "decomposed_value": relaxed.value,
            "epsilon": eps,
            "identity_feasible": identity_ok,
            "bound": bound.map(|b| json!({"lower": b.lower, "upper": b.upper})),
            "full_value_in_bound": contained,
            "suppressed": suppressed,
            "full_iterations": full.iterations,
            "decomposed_iterations": relaxed.iterations,
        }));
    } else {
        println!("full value {}", sig10(full.value));
        println!("decomposed value {}", sig10(relaxed.value));
        match eps {
            Some(e) => println!("epsilon {}", sig10(e)),
            None => println!("epsilon unknown"),
        }
        if let Some(ok) = identity_ok {
            println!("identity feasible: {}", if ok { "yes" } else { "no" });
        }
        match bound {
            Some(b) => {
                println!("bound interval [{}, {}]", sig10(b.lower), sig10(b.upper));
                println!(
                    "full value in interval: {}",
                    if contained.unwrap() { "yes" } else { "no" }
                );
            }
            None => {
                println!("bound suppressed: {}", suppressed.as_deref().unwrap_or(""));
            }
        }
    }
    if exit == EXIT_PRECONDITION {
        eprintln!("warning: bound requires identity/n feasibility, which failed");
    }
    Ok(exit)
}

fn cmd_decompose(
    path: &Path,
    tol: f64,
    json_mode: bool,
    assert_identity: bool,
) -> Result<u8, Failure> {
    let text = read(path)?;
    let s = SparseSdp::parse(&text)
        .map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    decompose_report(&s, tol, json_mode, assert_identity)
}

fn cmd_maxcut(
    graph_path: &Path,
    out: Option<&Path>,
    tol: f64,
    json_mode: bool,
) -> Result<u8, Failure> {
    let g = parse_graph(graph_path)?;
    let s = maxcut_sdp(&g).map_err(|e| fail(EXIT_PRECONDITION, e.to_string()))?;
    let default_out = graph_path.with_extension("sdp");
    let out_path = out.unwrap_or(&default_out);
    std::fs::write(out_path, s.to_text())
        .map_err(|e| fail(EXIT_PRECONDITION, format!("{}: {e}", out_path.display())))?;
    if !json_mode {
        println!("sdp file {}", out_path.display());
    }
    decompose_report(&s, tol, json_mode, true)
}

fn cmd_sample(graph_path: &Path, seed: u64, json_mode: bool) -> Result<u8, Failure> {
    let g = parse_graph(graph_path)?;
    if g.vertex_count() == 0 {
        return Err(fail(
            EXIT_PRECONDITION,
            "sampling needs at least one vertex",
        ));
    }
    let a = boundary_sample(&g, seed);
    if json_mode {
        let entries: Vec<Value> = a.entries().map(|(i, j, v)| json!([i, j, v])).collect();
        emit_json(json!({"n": a.n(), "entries": entries}));
    } else {
        print!("{}", a.to_text());
    }
    Ok(0)
}
