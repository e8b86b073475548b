#ifndef CONEDIST_H
#define CONEDIST_H

/* Generated from the Rust sources; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. Numeric values match the CLI exit
 * codes where the two surfaces overlap.
 */
typedef enum ConedistStatus {
  CONEDIST_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  CONEDIST_STATUS_NULL_ARGUMENT = 1,
  CONEDIST_STATUS_PARSE_ERROR = 2,
  /**
   * The graph is outside the recognized class.
   */
  CONEDIST_STATUS_NOT_MEMBER = 3,
  /**
   * Input violated a documented precondition (size limits, pattern
   * mismatches, degenerate values).
   */
  CONEDIST_STATUS_PRECONDITION = 4,
  /**
   * The interior-point solve stopped before reaching tolerance.
   */
  CONEDIST_STATUS_NO_CONVERGENCE = 5,
  CONEDIST_STATUS_INVALID_UTF8 = 6,
} ConedistStatus;

/**
 * Opaque graph handle.
 */
typedef struct ConedistGraph ConedistGraph;

/**
 * Opaque partial-matrix handle; the sparsity pattern travels with it.
 */
typedef struct ConedistMatrix ConedistMatrix;

/**
 * Scalar results of one shift-minimization solve.
 */
typedef struct ConedistEpsilonReport {
  /**
   * Smallest nonnegative diagonal shift with a PSD completion.
   */
  double epsilon;
  /**
   * Signed optimum before clamping at zero.
   */
  double raw_epsilon;
  /**
   * Certified value recovered from the dual matrix.
   */
  double dual_value;
  /**
   * Solver duality gap at the returned iterate.
   */
  double gap;
  /**
   * Numerical rank of the completion.
   */
  size_t rank;
  size_t iterations;
} ConedistEpsilonReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static version string; never freed by the caller.
 */
const char *conedist_version(void);

/**
 * Releases a string returned by any `*_to_text` or report call.
 *
 * # Safety
 * `s` must be a pointer previously returned by this library, or null.
 */
void conedist_string_free(char *s);

/**
 * Parses a graph from its text format (`n m` header, `u v` edge lines).
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be a valid pointer. On
 * success `*out` owns a handle to release with [`conedist_graph_free`].
 */
enum ConedistStatus conedist_graph_parse(const char *text, struct ConedistGraph **out);

/**
 * Builds the cycle graph `C_n` (`n >= 3`).
 *
 * # Safety
 * `out` must be a valid pointer; see [`conedist_graph_parse`].
 */
enum ConedistStatus conedist_graph_cycle(size_t n, struct ConedistGraph **out);

/**
 * Builds the wheel over a rim of `rim` vertices (`rim >= 3`); the hub is
 * vertex 0.
 *
 * # Safety
 * `out` must be a valid pointer; see [`conedist_graph_parse`].
 */
enum ConedistStatus conedist_graph_wheel(size_t rim, struct ConedistGraph **out);

/**
 * Builds the complete graph `K_n`.
 *
 * # Safety
 * `out` must be a valid pointer; see [`conedist_graph_parse`].
 */
enum ConedistStatus conedist_graph_complete(size_t n, struct ConedistGraph **out);

/**
 * Releases a graph handle.
 *
 * # Safety
 * `g` must come from this library and not be used afterwards; null is a
 * no-op.
 */
void conedist_graph_free(struct ConedistGraph *g);

/**
 * # Safety
 * `g` must be a live graph handle.
 */
enum ConedistStatus conedist_graph_vertex_count(const struct ConedistGraph *g, size_t *out);

/**
 * # Safety
 * `g` must be a live graph handle.
 */
enum ConedistStatus conedist_graph_edge_count(const struct ConedistGraph *g, size_t *out);

/**
 * Writes the graph in its text format.
 *
 * # Safety
 * `g` must be a live handle; release `*out` with
 * [`conedist_string_free`].
 */
enum ConedistStatus conedist_graph_to_text(const struct ConedistGraph *g, char **out);

/**
 * # Safety
 * `g` must be a live graph handle.
 */
enum ConedistStatus conedist_graph_is_chordal(const struct ConedistGraph *g, bool *out);

/**
 * Whether the graph lies in the recognized clique-sum class.
 *
 * # Safety
 * `g` must be a live graph handle.
 */
enum ConedistStatus conedist_graph_is_member(const struct ConedistGraph *g, bool *out);

/**
 * Closed-form pattern constant of a class member; `NotMember` otherwise.
 *
 * # Safety
 * `g` must be a live graph handle.
 */
enum ConedistStatus conedist_graph_epsilon(const struct ConedistGraph *g, double *out);

/**
 * Full membership report in the stable key-value text schema.
 *
 * # Safety
 * `g` must be a live handle; release `*out` with
 * [`conedist_string_free`].
 */
enum ConedistStatus conedist_graph_analysis(const struct ConedistGraph *g, char **out);

/**
 * Parses a partial matrix (`n` header, `i j value` lines). When
 * `pattern` is non-null the entries must live exactly on that graph.
 *
 * # Safety
 * `text` must be NUL-terminated; `pattern` may be null; `out` must be a
 * valid pointer. On success `*out` owns a handle to release with
 * [`conedist_matrix_free`].
 */
enum ConedistStatus conedist_matrix_parse(const char *text,
                                          const struct ConedistGraph *pattern,
                                          struct ConedistMatrix **out);

/**
 * Releases a matrix handle.
 *
 * # Safety
 * `m` must come from this library and not be used afterwards; null is a
 * no-op.
 */
void conedist_matrix_free(struct ConedistMatrix *m);

/**
 * Writes the matrix in its text format.
 *
 * # Safety
 * `m` must be a live handle; release `*out` with
 * [`conedist_string_free`].
 */
enum ConedistStatus conedist_matrix_to_text(const struct ConedistMatrix *m, char **out);

/**
 * Draws the seeded boundary sample of the partial positivity cone of
 * `g`; deterministic per seed.
 *
 * # Safety
 * `g` must be a live graph handle; `out` must be a valid pointer and on
 * success owns a new matrix handle.
 */
enum ConedistStatus conedist_boundary_sample(const struct ConedistGraph *g,
                                             uint64_t seed,
                                             struct ConedistMatrix **out);

/**
 * Minimal diagonal shift making the matrix PSD-completable, solved to
 * `tol` (pass 0 or a negative value for the 1e-8 default).
 *
 * # Safety
 * `m` must be a live matrix handle; `out` must be a valid pointer.
 */
enum ConedistStatus conedist_epsilon_at(const struct ConedistMatrix *m,
                                        double tol,
                                        struct ConedistEpsilonReport *out);

/**
 * Whether the partial matrix admits a PSD completion at tolerance `tol`
 * (pass 0 or a negative value for the 1e-8 default).
 *
 * # Safety
 * `m` must be a live matrix handle; `out` must be a valid pointer.
 */
enum ConedistStatus conedist_is_completable(const struct ConedistMatrix *m, double tol, bool *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONEDIST_H */
