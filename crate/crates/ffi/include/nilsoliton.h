#ifndef NILSOLITON_H
#define NILSOLITON_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  NS_STATUS_OK = 0,
  NS_STATUS_NULL_POINTER = 1,
  NS_STATUS_INVALID_ARGUMENT = 2,
  NS_STATUS_PARSE_ERROR = 3,
  NS_STATUS_INVALID_INPUT = 4,
  NS_STATUS_COMPUTATION_FAILED = 5,
  NS_STATUS_BUFFER_TOO_SMALL = 6,
  NS_STATUS_OVERFLOW = 7,
  NS_STATUS_PANIC = 8,
} NsStatus;

/**
 * Opaque bracket handle.
 */
typedef struct NsBracket NsBracket;

/**
 * Opaque graph handle.
 */
typedef struct NsGraph NsGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *ns_last_error(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void ns_string_free(char *s);

/**
 * Zero bracket on R^dim.
 *
 * # Safety
 * `out_bracket` must be valid for writes.
 */
NsStatus ns_bracket_new(size_t dim, NsBracket **out_bracket);

/**
 * Parses a bracket document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out_bracket` valid for writes.
 */
NsStatus ns_bracket_from_json(const char *json, NsBracket **out_bracket);

/**
 * Bracket document as a new string; free it with `ns_string_free`.
 *
 * # Safety
 * `b` must be a live handle; `out_json` valid for writes.
 */
NsStatus ns_bracket_to_json(const NsBracket *b, char **out_json);

/**
 * # Safety
 * `b` must be null or a live handle, not used afterwards.
 */
void ns_bracket_free(NsBracket *b);

/**
 * Dimension of the underlying space, 0 for a null handle.
 *
 * # Safety
 * `b` must be null or a live handle.
 */
size_t ns_bracket_dim(const NsBracket *b);

/**
 * Sets the coefficient of `e_k` in `[e_i, e_j]` (1-based).
 *
 * # Safety
 * `b` must be a live handle.
 */
NsStatus ns_bracket_set(NsBracket *b, size_t i, size_t j, size_t k, double c);

/**
 * # Safety
 * `b` must be a live handle; `out_c` valid for writes.
 */
NsStatus ns_bracket_get(const NsBracket *b, size_t i, size_t j, size_t k, double *out_c);

/**
 * Jacobi and nilpotency check. `*out_step` is 0 when not nilpotent.
 *
 * # Safety
 * `b` must be a live handle; outputs valid for writes.
 */
NsStatus ns_validate(const NsBracket *b, double tol, bool *out_jacobi_ok, size_t *out_step);

/**
 * Ricci operator, `dim * dim` entries in row-major order.
 *
 * # Safety
 * `b` must be a live handle; `buf` holds `*len` doubles.
 */
NsStatus ns_ricci(const NsBracket *b, double *buf, size_t *len);

/**
 * `F = 16 tr(Ric^2) / ||mu||^4`.
 *
 * # Safety
 * `b` must be a live handle; `out_f` valid for writes.
 */
NsStatus ns_f_value(const NsBracket *b, double *out_f);

/**
 * Nilsoliton test; `*out_c` receives the constant of `Ric = c I + D`.
 *
 * # Safety
 * `b` must be a live handle; outputs valid for writes.
 */
NsStatus ns_is_einstein(const NsBracket *b, double tol, bool *out_einstein, double *out_c);

/**
 * Eigenvalue type of the soliton derivation: distinct coprime values in
 * `values` and their multiplicities in `multiplicities`, both of length
 * `*len`.
 *
 * # Safety
 * `b` must be a live handle; both buffers hold `*len` elements.
 */
NsStatus ns_eigenvalue_type(const NsBracket *b,
                            double tol,
                            uint64_t *values,
                            size_t *multiplicities,
                            size_t *len);

/**
 * Minimal-norm point of the convex hull of the weights, length `dim`.
 *
 * # Safety
 * `b` must be a live handle; `buf` holds `*len` doubles.
 */
NsStatus ns_beta(const NsBracket *b, double *buf, size_t *len);

/**
 * Integrates the normalized gradient flow and returns the limit as a new
 * handle.
 *
 * # Safety
 * `b` must be a live handle; outputs valid for writes.
 */
NsStatus ns_flow(const NsBracket *b,
                 double grad_tol,
                 double max_time,
                 NsBracket **out_limit,
                 bool *out_converged);

/**
 * Graph from `edge_count` pairs of 1-based vertices in `edges`.
 *
 * # Safety
 * `edges` holds `2 * edge_count` values; `out_graph` valid for writes.
 */
NsStatus ns_graph_new(size_t vertices, const size_t *edges, size_t edge_count, NsGraph **out_graph);

/**
 * Graph from edge-list text or a JSON graph document.
 *
 * # Safety
 * `source` must be a NUL-terminated string; `out_graph` valid for writes.
 */
NsStatus ns_graph_parse(const char *source, NsGraph **out_graph);

/**
 * `G(r,s,t)`.
 *
 * # Safety
 * `out_graph` must be valid for writes.
 */
NsStatus ns_graph_grst(size_t r, size_t s, size_t t, NsGraph **out_graph);

/**
 * # Safety
 * `g` must be null or a live handle, not used afterwards.
 */
void ns_graph_free(NsGraph *g);

/**
 * Exact positivity of the weighting.
 *
 * # Safety
 * `g` must be a live handle; `out_positive` valid for writes.
 */
NsStatus ns_graph_is_positive(const NsGraph *g, bool *out_positive);

/**
 * Coprime integer weighting in edge order and its `nu`.
 * `NS_STATUS_OVERFLOW` when an entry does not fit in 64 bits.
 *
 * # Safety
 * `g` must be a live handle; `buf` holds `*len` values; `out_nu` valid.
 */
NsStatus ns_graph_weighting(const NsGraph *g, int64_t *buf, size_t *len, int64_t *out_nu);

/**
 * The graph's 2-step bracket with all coefficients 1, as a new handle.
 *
 * # Safety
 * `g` must be a live handle; `out_bracket` valid for writes.
 */
NsStatus ns_graph_to_bracket(const NsGraph *g, NsBracket **out_bracket);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NILSOLITON_H */
