#ifndef BURGERS_RG_H
#define BURGERS_RG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. The nonzero groups mirror the CLI exit codes.
 */
typedef enum BrgStatus {
  BRG_STATUS_OK = 0,
  /**
   * Null pointer, bad length or invalid UTF-8.
   */
  BRG_STATUS_INVALID_ARGUMENT = 1,
  BRG_STATUS_INVALID_INPUT = 2,
  BRG_STATUS_CONFIG = 3,
  /**
   * Zero-mass / odd hypothesis or smallness condition violated.
   */
  BRG_STATUS_HYPOTHESIS = 4,
  /**
   * Truncation, analyticity or solver failure.
   */
  BRG_STATUS_NUMERICS = 5,
  BRG_STATUS_IO = 6,
  BRG_STATUS_PANIC = 7,
} BrgStatus;

/**
 * Parsed run configuration.
 */
typedef struct BrgConfig BrgConfig;

/**
 * Result of an RG run.
 */
typedef struct BrgRun BrgRun;

/**
 * One row of the run history.
 */
typedef struct BrgRunRecord {
  size_t n;
  double t;
  double a_n;
  double g_norm;
  double f_norm;
  double lambda_n;
  double mass;
  double parity_defect;
  double e_n;
} BrgRunRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *brg_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *brg_version(void);

/**
 * Parse a TOML configuration. Relative data paths resolve against the
 * current directory.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be writable.
 */
enum BrgStatus brg_config_from_toml(const char *toml, struct BrgConfig **out);

/**
 * Load a TOML configuration file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum BrgStatus brg_config_load(const char *path, struct BrgConfig **out);

/**
 * Number of grid points of the configuration, or 0 for a null handle.
 *
 * # Safety
 * `config` must be null or a live handle.
 */
size_t brg_config_num_points(const struct BrgConfig *config);

/**
 * # Safety
 * `config` must be null or a handle from this library not yet freed.
 */
void brg_config_free(struct BrgConfig *config);

/**
 * Run the RG iteration on the configuration's initial data.
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum BrgStatus brg_run(const struct BrgConfig *config, struct BrgRun **out);

/**
 * Run the RG iteration on caller-supplied samples `f(x_j)`,
 * `x_j = (j - N/2)Δx`, replacing the configuration's initial data.
 *
 * # Safety
 * `samples` must point to `len` doubles; `config` must be a live handle;
 * `out` must be writable.
 */
enum BrgStatus brg_run_samples(const struct BrgConfig *config,
                               const double *samples,
                               size_t len,
                               struct BrgRun **out);

/**
 * Number of RG steps taken, or 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
size_t brg_run_iterations(const struct BrgRun *run);

/**
 * Limiting prefactor `A`; NaN for a null handle.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
double brg_run_a_limit(const struct BrgRun *run);

/**
 * `‖f_n - A f_1*‖_q` at the last step; NaN for a null handle.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
double brg_run_final_residual(const struct BrgRun *run);

/**
 * Fitted decay and spread exponents; NaN when the fit was not possible.
 *
 * # Safety
 * `run` must be a live handle; `alpha` and `beta` must be writable.
 */
enum BrgStatus brg_run_exponents(const struct BrgRun *run, double *alpha, double *beta);

/**
 * History row `n`, `0 ≤ n ≤ iterations`.
 *
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum BrgStatus brg_run_record(const struct BrgRun *run, size_t n, struct BrgRunRecord *out);

/**
 * Copy the samples of the last renormalized field into `out[0..len]`;
 * `len` must equal the grid size.
 *
 * # Safety
 * `run` must be a live handle; `out` must point to `len` writable doubles.
 */
enum BrgStatus brg_run_final_field(const struct BrgRun *run, double *out, size_t len);

/**
 * # Safety
 * `run` must be null or a handle from this library not yet freed.
 */
void brg_run_free(struct BrgRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BURGERS_RG_H */
