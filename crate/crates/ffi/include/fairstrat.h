#ifndef FAIRSTRAT_H
#define FAIRSTRAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FsStatus {
  FS_STATUS_OK = 0,
  FS_STATUS_NULL_POINTER = 1,
  FS_STATUS_INVALID_INPUT = 2,
  FS_STATUS_DIMENSION_MISMATCH = 3,
  FS_STATUS_EMPTY_GROUP = 4,
  FS_STATUS_ITERATION_CAP = 5,
  FS_STATUS_GRID_TOO_LARGE = 6,
  FS_STATUS_IO = 7,
  FS_STATUS_PARSE = 8,
  FS_STATUS_CONFIG = 9,
  FS_STATUS_PANIC = 10,
} FsStatus;

/**
 * Opaque dataset handle.
 */
typedef struct FsDataset FsDataset;

/**
 * Opaque handle to a randomized halfspace classifier.
 */
typedef struct FsModel FsModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *fs_last_error_message(void);

/**
 * Builds a dataset from row-major `features` (`n * dim`), `groups` and
 * `labels` (`n` each, labels 0 or 1).
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `out` must be writable.
 */
enum FsStatus fs_dataset_new(const double *features,
                             size_t n,
                             size_t dim,
                             const uint32_t *groups,
                             const uint8_t *labels,
                             size_t num_groups,
                             struct FsDataset **out);

/**
 * # Safety
 * `data` must come from [`fs_dataset_new`] and not be used afterwards.
 */
void fs_dataset_free(struct FsDataset *data);

/**
 * Number of agents and per-group counts (`out_counts` holds `num_groups`).
 *
 * # Safety
 * Pointers must be valid; `out_counts` may be null when `num_groups` is 0.
 */
enum FsStatus fs_dataset_shape(const struct FsDataset *data,
                               size_t *out_len,
                               size_t *out_dim,
                               size_t *out_counts,
                               size_t num_groups);

/**
 * Best response of an agent at `x` with budget `tau` to
 * `1[w·x + b >= 0]`. Writes the destination (`dim` values) and the label
 * it receives.
 *
 * # Safety
 * `x`, `w` and `out_z` must hold `dim` values.
 */
enum FsStatus fs_best_response(const double *x,
                               const double *w,
                               size_t dim,
                               double bias,
                               double tau,
                               double *out_z,
                               uint8_t *out_label);

/**
 * Euclidean projection of `z` onto `{l >= 0, sum l <= bound}`.
 *
 * # Safety
 * `z` and `out` must hold `len` values.
 */
enum FsStatus fs_project_capped_simplex(const double *z, size_t len, double bound, double *out);

/**
 * Minimax-fair training by exponential weights. `iterations == 0` uses the
 * derived round count for `gamma`.
 *
 * # Safety
 * `budgets` must hold `num_groups` values; `out` must be writable.
 */
enum FsStatus fs_solve_minimax(const struct FsDataset *data,
                               const double *budgets_ptr,
                               size_t num_groups,
                               double gamma,
                               size_t iterations,
                               struct FsModel **out);

/**
 * Error minimization under a minimax-fairness constraint. Zero
 * `iterations` / `estimate_iterations` use the derived schedules.
 *
 * # Safety
 * `budgets` must hold `num_groups` values; `out` and `out_gamma_hat` must
 * be writable (`out_gamma_hat` may be null).
 */
enum FsStatus fs_solve_constrained(const struct FsDataset *data,
                                   const double *budgets_ptr,
                                   size_t num_groups,
                                   double gamma,
                                   double epsilon,
                                   size_t iterations,
                                   size_t estimate_iterations,
                                   struct FsModel **out,
                                   double *out_gamma_hat);

/**
 * # Safety
 * `model` must come from a solver call and not be used afterwards.
 */
void fs_model_free(struct FsModel *model);

/**
 * Number of support classifiers and their dimension.
 *
 * # Safety
 * Pointers must be valid.
 */
enum FsStatus fs_model_shape(const struct FsModel *model, size_t *out_support, size_t *out_dim);

/**
 * Support classifier `index`: weights (`dim` values), bias and probability.
 *
 * # Safety
 * `out_weights` must hold `dim` values.
 */
enum FsStatus fs_model_component(const struct FsModel *model,
                                 size_t index,
                                 double *out_weights,
                                 size_t dim,
                                 double *out_bias,
                                 double *out_prob);

/**
 * Strategic errors of `model` on `data` when group `g` has budget
 * `budgets[g]`. `out_per_group` holds `num_groups` values.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum FsStatus fs_model_errors(const struct FsModel *model,
                              const struct FsDataset *data,
                              const double *budgets_ptr,
                              size_t num_groups,
                              double *out_overall,
                              double *out_per_group,
                              double *out_max_group);

/**
 * Exact minmax thresholds for one-dimensional data under the cost
 * `k_g * max(z - x, 0)`. Thresholds that reject everyone are written as
 * `INFINITY`.
 *
 * # Safety
 * `scales` and `out_thresholds` must hold `num_groups` values.
 */
enum FsStatus fs_separable_minmax(const struct FsDataset *data,
                                  const double *scales,
                                  size_t num_groups,
                                  double *out_thresholds,
                                  double *out_minmax);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FAIRSTRAT_H */
