#ifndef GRIDSHIFT_H
#define GRIDSHIFT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum GsStatus {
  GS_STATUS_OK = 0,
  GS_STATUS_NULL_POINTER = 1,
  GS_STATUS_INVALID_ARGUMENT = 2,
  GS_STATUS_DIMENSION_MISMATCH = 3,
  GS_STATUS_NO_VALID_PARTITION = 4,
  GS_STATUS_ZERO_VARIANCE = 5,
  GS_STATUS_NON_FINITE = 6,
  /**
   * Cholesky breakdown or an asymmetric covariance.
   */
  GS_STATUS_NUMERICAL = 7,
  GS_STATUS_SIZE_GUARD_EXCEEDED = 8,
  GS_STATUS_PARSE = 9,
  GS_STATUS_IO = 10,
  GS_STATUS_INSUFFICIENT_NULL_SAMPLE = 11,
  /**
   * A Rust panic was caught at the boundary.
   */
  GS_STATUS_INTERNAL = 99,
} GsStatus;

typedef enum GsSurface {
  GS_SURFACE_CONSTANT = 0,
  GS_SURFACE_A1 = 1,
  GS_SURFACE_A2 = 2,
  GS_SURFACE_A3 = 3,
  GS_SURFACE_A4 = 4,
} GsSurface;

typedef enum GsDependence {
  GS_DEPENDENCE_IID = 0,
  GS_DEPENDENCE_SMA = 1,
  GS_DEPENDENCE_SAR = 2,
} GsDependence;

typedef enum GsNoise {
  GS_NOISE_NORMAL = 0,
  GS_NOISE_STUDENT_T3 = 1,
  GS_NOISE_CHI_SQ2 = 2,
} GsNoise;

typedef enum GsTestKind {
  GS_TEST_KIND_GMD = 0,
  GS_TEST_KIND_VAR = 1,
} GsTestKind;

typedef enum GsDecorrelate {
  GS_DECORRELATE_NONE = 0,
  GS_DECORRELATE_FULL = 1,
  GS_DECORRELATE_SEPARABLE = 2,
} GsDecorrelate;

/**
 * Opaque grid handle.
 */
typedef struct GsGrid GsGrid;

/**
 * Outcome of `gs_run_test`.
 */
typedef struct GsTestResult {
  double statistic;
  double p_value;
  double sigma2_hat;
  /**
   * `U` for GMD, the block-mean sum of squares for Var.
   */
  double raw;
  size_t l_n;
  size_t l_m;
  size_t b_n;
  size_t b_m;
} GsTestResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies `rows * cols` row-major values into a new grid.
 *
 * # Safety
 * `data` must point to `rows * cols` readable doubles and `out` to a
 * writable handle slot.
 */
enum GsStatus gs_grid_new(size_t rows, size_t cols, const double *data, struct GsGrid **out);

/**
 * Reads a comma-separated grid file without header.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable handle slot.
 */
enum GsStatus gs_grid_read_csv(const char *path, struct GsGrid **out);

/**
 * Writes the grid as comma-separated text.
 *
 * # Safety
 * `grid` must be a live handle and `path` a NUL-terminated string.
 */
enum GsStatus gs_grid_write_csv(const struct GsGrid *grid, const char *path);

/**
 * Releases a grid. Null is ignored.
 *
 * # Safety
 * `grid` must come from this library and must not be used afterwards.
 */
void gs_grid_free(struct GsGrid *grid);

/**
 * Number of rows, or 0 for a null handle.
 *
 * # Safety
 * `grid` must be null or a live handle.
 */
size_t gs_grid_rows(const struct GsGrid *grid);

/**
 * Number of columns, or 0 for a null handle.
 *
 * # Safety
 * `grid` must be null or a live handle.
 */
size_t gs_grid_cols(const struct GsGrid *grid);

/**
 * Copies the values in row-major order; `len` must equal rows * cols.
 *
 * # Safety
 * `grid` must be a live handle and `out` must have room for `len` doubles.
 */
enum GsStatus gs_grid_copy(const struct GsGrid *grid, double *out, size_t len);

/**
 * Synthetic field: mean surface plus seeded noise. `q` is ignored for iid
 * noise; 0 selects the default order for the dependent models.
 *
 * # Safety
 * `out` must be a writable handle slot.
 */
enum GsStatus gs_generate_field(size_t n,
                                size_t m,
                                enum GsSurface surface,
                                double amplitude,
                                enum GsDependence dependence,
                                size_t q,
                                double rho,
                                enum GsNoise noise,
                                uint64_t seed,
                                double s_target,
                                struct GsGrid **out);

/**
 * Runs the GMD or Var test, optionally after de-correlation.
 *
 * # Safety
 * `grid` must be a live handle and `out` writable.
 */
enum GsStatus gs_run_test(const struct GsGrid *grid,
                          enum GsTestKind kind,
                          double s_target,
                          enum GsDecorrelate decorrelate,
                          struct GsTestResult *out);

/**
 * Holm's step-down procedure. `rejected` and `adjusted` receive `len`
 * entries each, in input order; either may be null if not wanted.
 *
 * # Safety
 * `p_values` must hold `len` doubles; non-null outputs must have room for
 * `len` entries.
 */
enum GsStatus gs_holm(const double *p_values,
                      size_t len,
                      double alpha,
                      bool *rejected,
                      double *adjusted);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to fit) and returns its full length in bytes. Pass a null
 * buffer to query the length.
 *
 * # Safety
 * `buf` must be null or have room for `len` bytes.
 */
size_t gs_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gs_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRIDSHIFT_H */
