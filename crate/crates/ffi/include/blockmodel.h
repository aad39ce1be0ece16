#ifndef BLOCKMODEL_H
#define BLOCKMODEL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum BmStatus {
  BM_OK = 0,
  /**
   * A required pointer was NULL.
   */
  BM_NULL_POINTER = 1,
  /**
   * Bad sizes, labels or model name.
   */
  BM_INVALID_ARGUMENT = 2,
  /**
   * Rejected graph input (self-loop, empty graph).
   */
  BM_INVALID_GRAPH = 3,
  /**
   * Numerical or search failure inside the library.
   */
  BM_SOLVER_FAILURE = 4,
  /**
   * A panic was caught at the boundary.
   */
  BM_PANIC = 5,
} BmStatus;

/**
 * Opaque graph handle.
 */
typedef struct BmGraph BmGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message on this thread, or NULL after a successful call. The
 * pointer stays valid until the next call into this library on the same
 * thread.
 */
const char *bm_last_error(void);

/**
 * Builds a graph on vertices `0..n` from `m` edges `src[i] -> dst[i]`.
 * Repeated pairs become multi-edges. Self-loops are rejected.
 *
 * # Safety
 * `src` and `dst` point to `m` readable values each (may be NULL when
 * `m == 0`); `out` is writable. Free the handle with `bm_graph_free`.
 */
enum BmStatus bm_graph_new(size_t n,
                           bool directed,
                           const uint32_t *src,
                           const uint32_t *dst,
                           size_t m,
                           struct BmGraph **out);

/**
 * Releases a graph. NULL is ignored.
 *
 * # Safety
 * `g` is NULL or a handle from `bm_graph_new` not yet freed.
 */
void bm_graph_free(struct BmGraph *g);

/**
 * Vertex count, 0 for NULL.
 *
 * # Safety
 * `g` is NULL or a live handle.
 */
size_t bm_graph_num_vertices(const struct BmGraph *g);

/**
 * Edge count including multiplicity, 0 for NULL.
 *
 * # Safety
 * `g` is NULL or a live handle.
 */
uint64_t bm_graph_num_edges(const struct BmGraph *g);

/**
 * Objective of model `model` ("sbm", "dc", "ddc", "odc", "dg-dc", ...) for
 * the labelling `labels[0..n]` into `k` blocks. Undirected models view a
 * directed graph without its orientations.
 *
 * # Safety
 * `g` is a live handle, `model` a NUL-terminated string, `labels` holds `n`
 * values and `out` is writable.
 */
enum BmStatus bm_loglik(const struct BmGraph *g,
                        const char *model,
                        const uint32_t *labels,
                        size_t n,
                        uint32_t k,
                        double *out);

/**
 * Runs the full search (random starts, heat-bath MCMC, then Kernighan-Lin
 * when `use_kl`) and writes the best labelling to `labels_out[0..n]` and its
 * objective to `objective_out` (which may be NULL).
 *
 * # Safety
 * `g` is a live handle, `model` a NUL-terminated string, `labels_out` has
 * room for `n` values, `objective_out` is NULL or writable.
 */
enum BmStatus bm_infer(const struct BmGraph *g,
                       const char *model,
                       uint32_t k,
                       uint32_t runs,
                       uint64_t steps,
                       bool use_kl,
                       uint64_t seed,
                       uint32_t *labels_out,
                       size_t n,
                       double *objective_out);

/**
 * Normalized mutual information between two labellings of `n` vertices.
 *
 * # Safety
 * `a` and `b` hold `n` values each; `out` is writable.
 */
enum BmStatus bm_nmi(const uint32_t *a, const uint32_t *b, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLOCKMODEL_H */
