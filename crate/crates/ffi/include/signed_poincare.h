#ifndef SIGNED_POINCARE_H
#define SIGNED_POINCARE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define SP_POLICY_NEGATIVE_WINS 0

#define SP_POLICY_DROP 1

#define SP_POLICY_FIRST_WINS 2

#define SP_STRATEGY_RANDOM 0

#define SP_STRATEGY_VIRTUAL 1

#define SP_STRATEGY_BALANCE 2

#define SP_RETRACTION_SIMPLE 0

#define SP_RETRACTION_EXP 1

#define SP_LR_CONSTANT 0

#define SP_LR_LINEAR 1

#define SP_METRIC_MACRO_F1 0

#define SP_METRIC_MICRO_F1 1

// Result code of every fallible call.
typedef enum SpStatus {
  SP_STATUS_OK = 0,
  SP_STATUS_NULL_POINTER = 1,
  SP_STATUS_INVALID_ARGUMENT = 2,
  SP_STATUS_IO = 3,
  SP_STATUS_PARSE = 4,
  SP_STATUS_GEOMETRY = 5,
  SP_STATUS_TRAINING = 6,
  SP_STATUS_EVALUATION = 7,
  SP_STATUS_PANIC = 8,
} SpStatus;

// Opaque embedding handle: node labels plus coordinates (virtual rows, if
// any, are dropped).
typedef struct SpEmbedding SpEmbedding;

// Opaque graph handle.
typedef struct SpGraph SpGraph;

// One signed edge; `sign` is +1 or -1.
typedef struct SpEdge {
  size_t src;
  size_t dst;
  int8_t sign;
} SpEdge;

// Training hyperparameters. Start from [`sp_train_config_default`].
typedef struct SpTrainConfig {
  size_t dim;
  double margin;
  double lr;
  size_t epochs;
  size_t batch_size;
  // 0 means one triple per training edge.
  size_t triples_per_epoch;
  uint32_t strategy;
  uint32_t retraction;
  uint32_t lr_decay;
  double eps;
  double init_radius;
  uint64_t seed;
  bool freeze_anchor;
  // Values above 1 give non-reproducible results.
  size_t threads;
} SpTrainConfig;

typedef struct SpEvalReport {
  double macro_f1;
  double micro_f1;
  double auc;
  double threshold;
  size_t tp;
  size_t fp;
  size_t tn;
  size_t fn_count;
  size_t edges;
} SpEvalReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *sp_last_error(void);

// Library version as a static NUL-terminated string.
const char *sp_version(void);

// Builds a graph over nodes `0..node_count` from possibly directed,
// duplicated edges; self-loops are dropped.
//
// # Safety
// `edges` must point to `edge_count` values (may be null if zero); `out`
// must be writable.
enum SpStatus sp_graph_from_edges(size_t node_count,
                                  const struct SpEdge *edges,
                                  size_t edge_count,
                                  uint32_t conflict_policy,
                                  struct SpGraph **out);

// Reads a `src dst sign` edge list. Nodes are numbered in order of first
// appearance.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum SpStatus sp_graph_load(const char *path, uint32_t conflict_policy, struct SpGraph **out);

// # Safety
// `graph` must be null or a live handle; it is invalid afterwards.
void sp_graph_free(struct SpGraph *graph);

// Node count, or 0 for a null handle.
//
// # Safety
// `graph` must be null or a live handle.
size_t sp_graph_node_count(const struct SpGraph *graph);

// Undirected edge count, or 0 for a null handle.
//
// # Safety
// `graph` must be null or a live handle.
size_t sp_graph_edge_count(const struct SpGraph *graph);

// Copies edge `index` (in storage order) into `out`.
//
// # Safety
// `graph` must be a live handle; `out` must be writable.
enum SpStatus sp_graph_edge(const struct SpGraph *graph, size_t index, struct SpEdge *out);

// Library defaults: 20 dimensions, margin 1, learning rate 0.05 decaying
// linearly, 100 epochs, batches of 512, virtual-node augmentation.
struct SpTrainConfig sp_train_config_default(void);

// Trains an embedding of `graph`.
//
// # Safety
// `graph` must be a live handle, `config` readable and `out` writable.
enum SpStatus sp_train(const struct SpGraph *graph,
                       const struct SpTrainConfig *config,
                       struct SpEmbedding **out);

// # Safety
// `embedding` must be null or a live handle; it is invalid afterwards.
void sp_embedding_free(struct SpEmbedding *embedding);

// Number of node rows, or 0 for a null handle.
//
// # Safety
// `embedding` must be null or a live handle.
size_t sp_embedding_rows(const struct SpEmbedding *embedding);

// Dimension, or 0 for a null handle.
//
// # Safety
// `embedding` must be null or a live handle.
size_t sp_embedding_dim(const struct SpEmbedding *embedding);

// Copies row `row` into `out`, which must hold `len == dim` doubles.
//
// # Safety
// `embedding` must be a live handle; `out` must point to `len` writable doubles.
enum SpStatus sp_embedding_row(const struct SpEmbedding *embedding,
                               size_t row,
                               double *out,
                               size_t len);

// Poincaré distance between rows `i` and `j`.
//
// # Safety
// `embedding` must be a live handle; `out` must be writable.
enum SpStatus sp_embedding_distance(const struct SpEmbedding *embedding,
                                    size_t i,
                                    size_t j,
                                    double *out);

// Sign score of the pair (negated distance): higher means more friendly.
//
// # Safety
// `embedding` must be a live handle; `out` must be writable.
enum SpStatus sp_embedding_score(const struct SpEmbedding *embedding,
                                 size_t i,
                                 size_t j,
                                 double *out);

// Writes the embedding in the tool's TSV format.
//
// # Safety
// `embedding` must be a live handle; `path` a NUL-terminated string.
enum SpStatus sp_embedding_save(const struct SpEmbedding *embedding, const char *path);

// Reads an embedding written by [`sp_embedding_save`] or the CLI.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum SpStatus sp_embedding_load(const char *path, struct SpEmbedding **out);

// Fits the score threshold that maximizes `metric` on `edges`.
//
// # Safety
// `embedding` must be a live handle; `edges` must point to `edge_count`
// values; `out` must be writable.
enum SpStatus sp_fit_threshold(const struct SpEmbedding *embedding,
                               const struct SpEdge *edges,
                               size_t edge_count,
                               uint32_t threshold_metric,
                               double *out);

// Classifies `edges` at `threshold` and reports F1 scores and AUC.
//
// # Safety
// `embedding` must be a live handle; `edges` must point to `edge_count`
// values; `out` must be writable.
enum SpStatus sp_evaluate(const struct SpEmbedding *embedding,
                          const struct SpEdge *edges,
                          size_t edge_count,
                          double threshold,
                          struct SpEvalReport *out);

// Area under the ROC curve of positive versus negative scores.
//
// # Safety
// `positive` / `negative` must point to the given number of doubles;
// `out` must be writable.
enum SpStatus sp_auc(const double *positive,
                     size_t positive_count,
                     const double *negative,
                     size_t negative_count,
                     double *out);

// Poincaré distance between two points of dimension `dim`.
//
// # Safety
// `u` and `v` must each point to `dim` doubles; `out` must be writable.
enum SpStatus sp_poincare_distance(const double *u, const double *v, size_t dim, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIGNED_POINCARE_H */
