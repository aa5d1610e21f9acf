#ifndef HOOPSNET_H
#define HOOPSNET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HnStatus {
  HN_STATUS_OK = 0,
  /**
   * Bad argument value or inconsistent sizes.
   */
  HN_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Input data failed validation.
   */
  HN_STATUS_DATA = 2,
  /**
   * Non-convergence, separation, I/O and other runtime failures.
   */
  HN_STATUS_NUMERICAL = 3,
  HN_STATUS_NULL_POINTER = 4,
  /**
   * Internal panic; the handle involved should be considered unusable.
   */
  HN_STATUS_PANIC = 5,
} HnStatus;

/**
 * Node embeddings, one row per node.
 */
typedef struct HnEmbedding HnEmbedding;

/**
 * Logistic regression result.
 */
typedef struct HnFit HnFit;

/**
 * Directed weighted graph.
 */
typedef struct HnGraph HnGraph;

/**
 * Walk and training settings; start from `hn_embed_params_default`.
 */
typedef struct HnEmbedParams {
  double p;
  double q;
  size_t walk_length;
  size_t walks_per_node;
  size_t dimensions;
  size_t window;
  size_t negative_samples;
  size_t epochs;
  double lr_initial;
  double lr_final;
  uint64_t walk_seed;
  uint64_t train_seed;
} HnEmbedParams;

typedef struct HnFitSummary {
  double log_lik;
  double null_log_lik;
  double pseudo_r2;
  double llr_stat;
  double llr_p;
  size_t n_obs;
  size_t df_model;
  size_t iterations;
  bool converged;
  bool ridge_applied;
} HnFitSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the next call.
 */
const char *hn_last_error(void);

/**
 * Empty graph; never NULL.
 */
struct HnGraph *hn_graph_new(void);

/**
 * # Safety
 * `graph` must come from this library and not be used afterwards. NULL is ignored.
 */
void hn_graph_free(struct HnGraph *graph);

/**
 * Reads an edge-list CSV (`source_label,target_label,weight`).
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HnStatus hn_graph_load(const char *path, struct HnGraph **out);

/**
 * Id of the node labelled `label`, created if absent.
 *
 * # Safety
 * `graph` must be a live handle, `label` NUL-terminated, `out_id` valid.
 */
enum HnStatus hn_graph_add_node(struct HnGraph *graph, const char *label, size_t *out_id);

/**
 * Adds `weight` to edge `source -> target`, creating it if needed.
 *
 * # Safety
 * `graph` must be a live handle.
 */
enum HnStatus hn_graph_add_edge(struct HnGraph *graph, size_t source, size_t target, double weight);

/**
 * Node count, 0 for NULL.
 *
 * # Safety
 * `graph` must be a live handle or NULL.
 */
size_t hn_graph_num_nodes(const struct HnGraph *graph);

/**
 * Edge count, 0 for NULL.
 *
 * # Safety
 * `graph` must be a live handle or NULL.
 */
size_t hn_graph_num_edges(const struct HnGraph *graph);

/**
 * CON scores into `out[0..len)`, `len` equal to the node count.
 *
 * # Safety
 * `graph` must be a live handle; `out` must hold `len` values.
 */
enum HnStatus hn_con_scores(const struct HnGraph *graph,
                            bool include_self,
                            uint64_t *out,
                            size_t len);

/**
 * Reversed-edge weighted PageRank with the given damping (0.85 is customary).
 *
 * # Safety
 * `graph` must be a live handle; `out` must hold `len` values.
 */
enum HnStatus hn_pagerank(const struct HnGraph *graph, double damping, double *out, size_t len);

/**
 * Low-key leader strengths (normalized CON minus normalized PageRank).
 *
 * # Safety
 * `graph` must be a live handle; `out` must hold `len` values.
 */
enum HnStatus hn_lkl(const struct HnGraph *graph, bool include_self, double *out, size_t len);

struct HnEmbedParams hn_embed_params_default(void);

/**
 * node2vec embeddings of `graph`.
 *
 * # Safety
 * `graph` must be a live handle, `params` and `out` valid pointers.
 */
enum HnStatus hn_node2vec(const struct HnGraph *graph,
                          const struct HnEmbedParams *params,
                          struct HnEmbedding **out);

/**
 * # Safety
 * `emb` must come from this library and not be used afterwards. NULL is ignored.
 */
void hn_embedding_free(struct HnEmbedding *emb);

/**
 * # Safety
 * `emb` must be a live handle or NULL.
 */
size_t hn_embedding_dims(const struct HnEmbedding *emb);

/**
 * # Safety
 * `emb` must be a live handle or NULL.
 */
size_t hn_embedding_rows(const struct HnEmbedding *emb);

/**
 * Copies the vector of `node` into `out`, `len` equal to the dimension.
 *
 * # Safety
 * `emb` must be a live handle; `out` must hold `len` values.
 */
enum HnStatus hn_embedding_row(const struct HnEmbedding *emb, size_t node, double *out, size_t len);

/**
 * Cosine similarity of two nodes' vectors; 0 if either is zero.
 *
 * # Safety
 * `emb` must be a live handle and `out` valid.
 */
enum HnStatus hn_embedding_cosine(const struct HnEmbedding *emb, size_t a, size_t b, double *out);

/**
 * Maximum-likelihood logistic regression of `y` on the row-major `rows x cols`
 * matrix `x` plus an intercept. `ridge` is used only for singular fits (0 disables).
 *
 * # Safety
 * `x` must hold `rows * cols` values, `y` `rows` values of 0 or 1; `out` valid.
 */
enum HnStatus hn_fit_logistic(const double *x,
                              size_t rows,
                              size_t cols,
                              const uint8_t *y,
                              double ridge,
                              struct HnFit **out);

/**
 * # Safety
 * `fit` must come from this library and not be used afterwards. NULL is ignored.
 */
void hn_fit_free(struct HnFit *fit);

/**
 * Number of coefficients including the intercept.
 *
 * # Safety
 * `fit` must be a live handle or NULL.
 */
size_t hn_fit_num_coefficients(const struct HnFit *fit);

/**
 * Intercept first.
 *
 * # Safety
 * `fit` must be a live handle; `out` must hold `len` values.
 */
enum HnStatus hn_fit_coefficients(const struct HnFit *fit, double *out, size_t len);

/**
 * Standard errors, intercept first.
 *
 * # Safety
 * `fit` must be a live handle; `out` must hold `len` values.
 */
enum HnStatus hn_fit_std_errors(const struct HnFit *fit, double *out, size_t len);

/**
 * Wald p-values, intercept first.
 *
 * # Safety
 * `fit` must be a live handle; `out` must hold `len` values.
 */
enum HnStatus hn_fit_p_values(const struct HnFit *fit, double *out, size_t len);

/**
 * # Safety
 * `fit` must be a live handle and `out` valid.
 */
enum HnStatus hn_fit_summary(const struct HnFit *fit, struct HnFitSummary *out);

/**
 * `P(X > x)` for chi-square with `df` degrees of freedom; NaN if `df` is 0.
 */
double hn_chi_square_sf(double x, uint32_t df);

/**
 * `P(Z > z)` for a standard normal.
 */
double hn_normal_sf(double z);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOOPSNET_H */
