#ifndef ELASTIC_SPARSE_H
#define ELASTIC_SPARSE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum {
  ES_STATUS_OK = 0,
  ES_STATUS_NULL_POINTER = 1,
  ES_STATUS_INVALID_ARGUMENT = 2,
  ES_STATUS_DIMENSION_MISMATCH = 3,
  ES_STATUS_DEGENERATE_SERIES = 4,
  ES_STATUS_IO_ERROR = 5,
  ES_STATUS_FORMAT_ERROR = 6,
  /**
   * The sparse matrix admits no path to the terminal cell.
   */
  ES_STATUS_UNREACHABLE = 7,
  ES_STATUS_INSUFFICIENT_DATA = 8,
  ES_STATUS_INTERNAL = 9,
} EsStatus;

/**
 * Local cost selector for the DTW family.
 */
typedef enum {
  ES_LOCAL_COST_SQUARED_DIFFERENCE = 0,
  ES_LOCAL_COST_ABSOLUTE_DIFFERENCE = 1,
} EsLocalCost;

/**
 * Opaque labeled dataset handle.
 */
typedef struct EsDataset EsDataset;

/**
 * Opaque sparse path matrix handle.
 */
typedef struct EsPathMatrix EsPathMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static human-readable description of a status code.
 */
const char *es_status_message(EsStatus status);

/**
 * Library version as a static C string.
 */
const char *es_version(void);

/**
 * Loads a UCR-format text file (tab or comma delimited, auto-detected).
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid
 * pointer; the returned handle must be released with
 * [`es_dataset_free`].
 */
EsStatus es_dataset_load(const char *path, EsDataset **out);

/**
 * Number of series, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live handle from [`es_dataset_load`].
 */
uintptr_t es_dataset_len(const EsDataset *ds);

/**
 * Common series length T, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live handle from [`es_dataset_load`].
 */
uintptr_t es_dataset_series_len(const EsDataset *ds);

/**
 * Class label of series `index`.
 *
 * # Safety
 * `ds` must be a live handle and `out` a valid pointer.
 */
EsStatus es_dataset_label(const EsDataset *ds, uintptr_t index, int64_t *out);

/**
 * Copies series `index` into `buffer` (capacity `len`, which must equal
 * the series length).
 *
 * # Safety
 * `ds` must be a live handle; `buffer` must point to at least `len`
 * writable doubles.
 */
EsStatus es_dataset_values(const EsDataset *ds, uintptr_t index, double *buffer, uintptr_t len);

/**
 * Releases a dataset handle. Null is ignored.
 *
 * # Safety
 * `ds` must be null or a handle not yet freed.
 */
void es_dataset_free(EsDataset *ds);

/**
 * Learns a sparse path matrix from all pairwise optimal alignments of
 * `train`, thresholded at `theta` and weighted by occupancy^(−gamma).
 *
 * # Safety
 * `train` must be a live dataset handle and `out` a valid pointer; the
 * returned handle must be released with [`es_spm_free`].
 */
EsStatus es_spm_learn(const EsDataset *train,
                      EsLocalCost cost,
                      uint64_t theta,
                      double gamma,
                      EsPathMatrix **out);

/**
 * Reads a matrix from an SPM text file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid
 * pointer; release the handle with [`es_spm_free`].
 */
EsStatus es_spm_load(const char *path, EsPathMatrix **out);

/**
 * Writes a matrix to an SPM text file.
 *
 * # Safety
 * `m` must be a live handle and `path` a valid NUL-terminated string.
 */
EsStatus es_spm_save(const EsPathMatrix *m, const char *path);

/**
 * Number of entries, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
uintptr_t es_spm_len(const EsPathMatrix *m);

/**
 * Grid dimension T, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
uintptr_t es_spm_dim(const EsPathMatrix *m);

/**
 * Releases a matrix handle. Null is ignored.
 *
 * # Safety
 * `m` must be null or a handle not yet freed.
 */
void es_spm_free(EsPathMatrix *m);

/**
 * Euclidean distance between two equal-length series.
 *
 * # Safety
 * `x` and `y` must point to `x_len` / `y_len` readable doubles; `out`
 * must be valid.
 */
EsStatus es_euclidean(const double *x,
                      uintptr_t x_len,
                      const double *y,
                      uintptr_t y_len,
                      double *out);

/**
 * Dynamic time warping over the full grid.
 *
 * # Safety
 * Buffer arguments as in [`es_euclidean`]; `out_value` must be valid
 * and `out_visited` may be null.
 */
EsStatus es_dtw(const double *x,
                uintptr_t x_len,
                const double *y,
                uintptr_t y_len,
                EsLocalCost cost,
                double *out_value,
                uint64_t *out_visited);

/**
 * Sakoe-Chiba banded DTW; `band_pct` is the corridor radius in percent
 * of the series length.
 *
 * # Safety
 * As in [`es_dtw`]; both series must have length `len`.
 */
EsStatus es_dtw_sc(const double *x,
                   const double *y,
                   uintptr_t len,
                   EsLocalCost cost,
                   uint8_t band_pct,
                   double *out_value,
                   uint64_t *out_visited);

/**
 * Log of the regularized time-elastic kernel over the full grid.
 *
 * # Safety
 * As in [`es_dtw_sc`].
 */
EsStatus es_krdtw(const double *x,
                  const double *y,
                  uintptr_t len,
                  double nu,
                  double *out_log_value,
                  uint64_t *out_visited);

/**
 * Sparsified-paths DTW over the entries of `m`.
 *
 * Returns `ES_STATUS_UNREACHABLE` when no admissible path reaches the
 * terminal cell (only possible for hand-built matrices).
 *
 * # Safety
 * `m` must be a live handle; buffers as in [`es_dtw_sc`].
 */
EsStatus es_sp_dtw(const EsPathMatrix *m,
                   const double *x,
                   const double *y,
                   uintptr_t len,
                   EsLocalCost cost,
                   double *out_value,
                   uint64_t *out_visited);

/**
 * Log of the sparsified-paths kernel over the entries of `m` (entry
 * weights are ignored).
 *
 * # Safety
 * As in [`es_sp_dtw`].
 */
EsStatus es_sp_krdtw(const EsPathMatrix *m,
                     const double *x,
                     const double *y,
                     uintptr_t len,
                     double nu,
                     double *out_log_value,
                     uint64_t *out_visited);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ELASTIC_SPARSE_H */
