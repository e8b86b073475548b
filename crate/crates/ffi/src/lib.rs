//! C ABI over the conedist library.
//!
//! Handles are opaque heap pointers created and destroyed here; strings
//! returned to the caller are NUL-terminated copies released with
//! [`conedist_string_free`]. Every entry point is null-safe and reports
//! through [`ConedistStatus`] instead of unwinding across the boundary.

use std::ffi::{c_char, CStr, CString};

use conedist::completion::{epsilon_at, is_psd_completable, CompletionError};
use conedist::graph::Graph;
use conedist::partial::PartialMatrix;
use conedist::recognition::is_in_class;
use conedist::sampling::boundary_sample;

/// Result of every fallible call. Numeric values match the CLI exit
/// codes where the two surfaces overlap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConedistStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    ParseError = 2,
    /// The graph is outside the recognized class.
    NotMember = 3,
    /// Input violated a documented precondition (size limits, pattern
    /// mismatches, degenerate values).
    Precondition = 4,
    /// The interior-point solve stopped before reaching tolerance.
    NoConvergence = 5,
    InvalidUtf8 = 6,
}

/// Opaque graph handle.
pub struct ConedistGraph(Graph);

/// Opaque partial-matrix handle; the sparsity pattern travels with it.
pub struct ConedistMatrix(PartialMatrix);

/// Scalar results of one shift-minimization solve.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ConedistEpsilonReport {
    /// Smallest nonnegative diagonal shift with a PSD completion.
    pub epsilon: f64,
    /// Signed optimum before clamping at zero.
    pub raw_epsilon: f64,
    /// Certified value recovered from the dual matrix.
    pub dual_value: f64,
    /// Solver duality gap at the returned iterate.
    pub gap: f64,
    /// Numerical rank of the completion.
    pub rank: usize,
    pub iterations: usize,
}

fn completion_status(e: &CompletionError) -> ConedistStatus {
    match e {
        CompletionError::SolverDidNotConverge { .. } => ConedistStatus::NoConvergence,
        _ => ConedistStatus::Precondition,
    }
}

/// # Safety
/// `text` must be a valid NUL-terminated string; returns a borrowed str.
unsafe fn read_c_str<'a>(text: *const c_char) -> Result<&'a str, ConedistStatus> {
    if text.is_null() {
        return Err(ConedistStatus::NullArgument);
    }
    CStr::from_ptr(text)
        .to_str()
        .map_err(|_| ConedistStatus::InvalidUtf8)
}

fn give_string(s: String, out: *mut *mut c_char) -> ConedistStatus {
    // Interior NULs cannot appear in our reports; guard anyway.
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            ConedistStatus::Ok
        }
        Err(_) => ConedistStatus::Precondition,
    }
}

/// Static version string; never freed by the caller.
#[no_mangle]
pub extern "C" fn conedist_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Releases a string returned by any `*_to_text` or report call.
///
/// # Safety
/// `s` must be a pointer previously returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn conedist_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a graph from its text format (`n m` header, `u v` edge lines).
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be a valid pointer. On
/// success `*out` owns a handle to release with [`conedist_graph_free`].
#[no_mangle]
pub unsafe extern "C" fn conedist_graph_parse(
    text: *const c_char,
    out: *mut *mut ConedistGraph,
) -> ConedistStatus {
    if out.is_null() {
        return ConedistStatus::NullArgument;
    }
    let text = match read_c_str(text) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match Graph::parse(text) {
        Ok(g) => {
            *out = Box::into_raw(Box::new(ConedistGraph(g)));
            ConedistStatus::Ok
        }
        Err(_) => ConedistStatus::ParseError,
    }
}

unsafe fn give_graph(g: Graph, out: *mut *mut ConedistGraph) -> ConedistStatus {
    if out.is_null() {
        return ConedistStatus::NullArgument;
    }
    *out = Box::into_raw(Box::new(ConedistGraph(g)));
    ConedistStatus::Ok
}

/// Builds the cycle graph `C_n` (`n >= 3`).
///
/// # Safety
/// `out` must be a valid pointer; see [`conedist_graph_parse`].
#[no_mangle]
pub unsafe extern "C" fn conedist_graph_cycle(
    n: usize,
    out: *mut *mut ConedistGraph,
) -> ConedistStatus {
    if n < 3 {
        return ConedistStatus::Precondition;
    }
    give_graph(Graph::cycle(n), out)
}

/// Builds the wheel over a rim of `rim` vertices (`rim >= 3`); the hub is
/// vertex 0.
///
/// # Safety
/// `out` must be a valid pointer; see [`conedist_graph_parse`].
#[no_mangle]
pub unsafe extern "C" fn conedist_graph_wheel(
    rim: usize,
    out: *mut *mut ConedistGraph,
) -> ConedistStatus {
    if rim < 3 {
        return ConedistStatus::Precondition;
    }
    give_graph(Graph::wheel(rim), out)
}

/// Builds the complete graph `K_n`.
///
/// # Safety
/// `out` must be a valid pointer; see [`conedist_graph_parse`].
#[no_mangle]
pub unsafe extern "C" fn conedist_graph_complete(
    n: usize,
    out: *mut *mut ConedistGraph,
) -> ConedistStatus {
    give_graph(Graph::complete(n), out)
}

/// Releases a graph handle.
///
/// # Safety
/// `g` must come from this library and not be used afterwards; null is a
/// no-op.
#[no_mangle]
pub unsafe extern "C" fn conedist_graph_free(g: *mut ConedistGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn conedist_graph_vertex_count(
    g: *const ConedistGraph,
    out: *mut usize,
) -> ConedistStatus {
    if g.is_null() || out.is_null() {
        return ConedistStatus::NullArgument;
    }
    *out = (*g).0.vertex_count();
    ConedistStatus::Ok
}

/// # Safety
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn conedist_graph_edge_count(
    g: *const ConedistGraph,
    out: *mut usize,
) -> ConedistStatus {
    if g.is_null() || out.is_null() {
        return ConedistStatus::NullArgument;
    }
    *out = (*g).0.edge_count();
    ConedistStatus::Ok
}

/// Writes the graph in its text format.
///
/// # Safety
/// `g` must be a live handle; release `*out` with
/// [`conedist_string_free`].
#[no_mangle]
pub unsafe extern "C" fn conedist_graph_to_text(
    g: *const ConedistGraph,
    out: *mut *mut c_char,
) -> ConedistStatus {
    if g.is_null() || out.is_null() {
        return ConedistStatus::NullArgument;
    }
    give_string((*g).0.to_text(), out)
}

/// # Safety
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn conedist_graph_is_chordal(
    g: *const ConedistGraph,
    out: *mut bool,
) -> ConedistStatus {
    if g.is_null() || out.is_null() {
        return ConedistStatus::NullArgument;
    }
    *out = (*g).0.is_chordal();
    ConedistStatus::Ok
}

/// Whether the graph lies in the recognized clique-sum class.
///
/// # Safety
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn conedist_graph_is_member(
    g: *const ConedistGraph,
    out: *mut bool,
) -> ConedistStatus {
    if g.is_null() || out.is_null() {
        return ConedistStatus::NullArgument;
    }
    *out = is_in_class(&(*g).0).member;
    ConedistStatus::Ok
}

/// Closed-form pattern constant of a class member; `NotMember` otherwise.
///
/// # Safety
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn conedist_graph_epsilon(
    g: *const ConedistGraph,
    out: *mut f64,
) -> ConedistStatus {
    if g.is_null() || out.is_null() {
        return ConedistStatus::NullArgument;
    }
    let cert = is_in_class(&(*g).0);
    match cert.epsilon {
        Some(e) => {
            *out = e;
            ConedistStatus::Ok
        }
        None => ConedistStatus::NotMember,
    }
}

/// Full membership report in the stable key-value text schema.
///
/// # Safety
/// `g` must be a live handle; release `*out` with
/// [`conedist_string_free`].
#[no_mangle]
pub unsafe extern "C" fn conedist_graph_analysis(
    g: *const ConedistGraph,
    out: *mut *mut c_char,
) -> ConedistStatus {
    if g.is_null() || out.is_null() {
        return ConedistStatus::NullArgument;
    }
    give_string(is_in_class(&(*g).0).to_text(), out)
}

/// Parses a partial matrix (`n` header, `i j value` lines). When
/// `pattern` is non-null the entries must live exactly on that graph.
///
/// # Safety
/// `text` must be NUL-terminated; `pattern` may be null; `out` must be a
/// valid pointer. On success `*out` owns a handle to release with
/// [`conedist_matrix_free`].
#[no_mangle]
pub unsafe extern "C" fn conedist_matrix_parse(
    text: *const c_char,
    pattern: *const ConedistGraph,
    out: *mut *mut ConedistMatrix,
) -> ConedistStatus {
    if out.is_null() {
        return ConedistStatus::NullArgument;
    }
    let text = match read_c_str(text) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let pattern = if pattern.is_null() {
        None
    } else {
        Some(&(*pattern).0)
    };
    match PartialMatrix::parse(text, pattern) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(ConedistMatrix(m)));
            ConedistStatus::Ok
        }
        Err(_) => ConedistStatus::ParseError,
    }
}

/// Releases a matrix handle.
///
/// # Safety
/// `m` must come from this library and not be used afterwards; null is a
/// no-op.
#[no_mangle]
pub unsafe extern "C" fn conedist_matrix_free(m: *mut ConedistMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Writes the matrix in its text format.
///
/// # Safety
/// `m` must be a live handle; release `*out` with
/// [`conedist_string_free`].
#[no_mangle]
pub unsafe extern "C" fn conedist_matrix_to_text(
    m: *const ConedistMatrix,
    out: *mut *mut c_char,
) -> ConedistStatus {
    if m.is_null() || out.is_null() {
        return ConedistStatus::NullArgument;
    }
    give_string((*m).0.to_text(), out)
}

/// Draws the seeded boundary sample of the partial positivity cone of
/// `g`; deterministic per seed.
///
/// # Safety
/// `g` must be a live graph handle; `out` must be a valid pointer and on
/// success owns a new matrix handle.
#[no_mangle]
pub unsafe extern "C" fn conedist_boundary_sample(
    g: *const ConedistGraph,
    seed: u64,
    out: *mut *mut ConedistMatrix,
) -> ConedistStatus {
    if g.is_null() || out.is_null() {
        return ConedistStatus::NullArgument;
    }
    if (*g).0.vertex_count() == 0 {
        return ConedistStatus::Precondition;
    }
    let a = boundary_sample(&(*g).0, seed);
    *out = Box::into_raw(Box::new(ConedistMatrix(a)));
    ConedistStatus::Ok
}

/// Minimal diagonal shift making the matrix PSD-completable, solved to
/// `tol` (pass 0 or a negative value for the 1e-8 default).
///
/// # Safety
/// `m` must be a live matrix handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn conedist_epsilon_at(
    m: *const ConedistMatrix,
    tol: f64,
    out: *mut ConedistEpsilonReport,
) -> ConedistStatus {
    if m.is_null() || out.is_null() {
        return ConedistStatus::NullArgument;
    }
    let tol = if tol > 0.0 { tol } else { 1e-8 };
    match epsilon_at(&(*m).0, tol) {
        Ok(r) => {
            *out = ConedistEpsilonReport {
                epsilon: r.epsilon,
                raw_epsilon: r.raw_epsilon,
                dual_value: r.certificate_value,
                gap: r.gap,
                rank: r.rank,
                iterations: r.iterations,
            };
            ConedistStatus::Ok
        }
        Err(e) => completion_status(&e),
    }
}

/// Whether the partial matrix admits a PSD completion at tolerance `tol`
/// (pass 0 or a negative value for the 1e-8 default).
///
/// # Safety
/// `m` must be a live matrix handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn conedist_is_completable(
    m: *const ConedistMatrix,
    tol: f64,
    out: *mut bool,
) -> ConedistStatus {
    if m.is_null() || out.is_null() {
        return ConedistStatus::NullArgument;
    }
    let tol = if tol > 0.0 { tol } else { 1e-8 };
    match is_psd_completable(&(*m).0, tol) {
        Ok(v) => {
            *out = v.is_completable();
            ConedistStatus::Ok
        }
        Err(e) => completion_status(&e),
    }
}
