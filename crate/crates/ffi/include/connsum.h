#ifndef CONNSUM_H
#define CONNSUM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CsStatus {
  CS_STATUS_OK = 0,
  CS_STATUS_NULL_POINTER = 1,
  CS_STATUS_INVALID_ARGUMENT = 2,
  CS_STATUS_NORMALIZATION_FAILED = 3,
  /**
   * Model validation failed or the certificate is not valid.
   */
  CS_STATUS_VERIFICATION_FAILED = 4,
  /**
   * File or schema error while loading a run configuration.
   */
  CS_STATUS_IO_ERROR = 5,
  CS_STATUS_BUFFER_TOO_SMALL = 6,
  CS_STATUS_PANIC = 7,
} CsStatus;

typedef enum CsMode {
  CS_MODE_CONNECTED_SUM = 0,
  CS_MODE_LOWER_DIM_SPHERES = 1,
} CsMode;

/**
 * A growth table.
 */
typedef struct CsGrowth CsGrowth;

/**
 * A finished pipeline run: model, `z`, `w` and the certificate.
 */
typedef struct CsRun CsRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message of the last failed call on this thread. Valid until the next
 * call into the library on this thread; never null.
 */
const char *cs_last_error(void);

/**
 * Library version, static and NUL-terminated.
 */
const char *cs_version(void);

/**
 * Copies `len` values into a new growth table.
 *
 * # Safety
 * `values` must point to `len` readable `uint64_t`; `out` must be writable.
 */
enum CsStatus cs_growth_new(const uint64_t *values, size_t len, struct CsGrowth **out);

/**
 * # Safety
 * `g` must come from this library and not be freed twice. Null is ignored.
 */
void cs_growth_free(struct CsGrowth *g);

/**
 * Number of entries, `horizon + 1`; 0 for null.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t cs_growth_len(const struct CsGrowth *g);

/**
 * Copies the values into `buf`; `*written` receives the length even when
 * the buffer is too small.
 *
 * # Safety
 * `g` must be a live handle; `buf` must hold `cap` writable slots.
 */
enum CsStatus cs_growth_values(const struct CsGrowth *g,
                               uint64_t *buf,
                               size_t cap,
                               size_t *written);

/**
 * Smallest bgd constant `L` of the table.
 *
 * # Safety
 * `g` must be a live handle; `out_l` must be writable.
 */
enum CsStatus cs_growth_check_bgd(const struct CsGrowth *g, uint64_t *out_l);

/**
 * Canonical form with `λ = lambda_num / lambda_den`; `*out_a` receives the
 * equivalence witness.
 *
 * # Safety
 * `g` must be a live handle; `out` and `out_a` must be writable.
 */
enum CsStatus cs_growth_normalize(const struct CsGrowth *g,
                                  int64_t lambda_num,
                                  int64_t lambda_den,
                                  uint64_t a_max,
                                  struct CsGrowth **out,
                                  uint64_t *out_a);

/**
 * Least witness `A ≤ a_max` that `f` and `h` have the same growth type, or
 * 0 in `*out_a` when none is found.
 *
 * # Safety
 * `f` and `h` must be live handles; `out_a` must be writable.
 */
enum CsStatus cs_same_growth_type(const struct CsGrowth *f,
                                  const struct CsGrowth *h,
                                  uint64_t a_max,
                                  uint64_t *out_a);

/**
 * Normalizes `v`, schedules and assembles it with the shipped catalog for
 * `mode`, and certifies the model.
 *
 * `mode` is a [`CsMode`] value. A run whose certificate is not valid is
 * still returned in `*out` (with status [`CsStatus::VerificationFailed`])
 * so its witnesses can be read.
 *
 * # Safety
 * `v` must be a live handle; `out` must be writable.
 */
enum CsStatus cs_run_certify(const struct CsGrowth *v,
                             int32_t mode,
                             uint64_t resolution,
                             uint64_t a_max,
                             struct CsRun **out);

/**
 * Runs the full pipeline from a TOML run configuration and writes every
 * artifact to its output directory, as `connsum certify --config` does.
 *
 * # Safety
 * `config_path` must be a NUL-terminated UTF-8 path; `out` must be writable.
 */
enum CsStatus cs_run_config(const char *config_path, struct CsRun **out);

/**
 * # Safety
 * `run` must come from this library and not be freed twice. Null is ignored.
 */
void cs_run_free(struct CsRun *run);

/**
 * 1 when the certificate is valid, 0 otherwise or for null.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
int32_t cs_run_is_valid(const struct CsRun *run);

/**
 * Witnesses `A₁` for `(v, z)` and `A₂` for `(z, w)`; 0 where none was found.
 *
 * # Safety
 * `run` must be a live handle; `a1` and `a2` must be writable.
 */
enum CsStatus cs_run_witnesses(const struct CsRun *run, uint64_t *a1, uint64_t *a2);

/**
 * The discrete growth `z(0), …, z(horizon)` on the length index.
 *
 * # Safety
 * `run` must be a live handle; `buf` must hold `cap` writable slots.
 */
enum CsStatus cs_run_z(const struct CsRun *run, uint64_t *buf, size_t cap, size_t *written);

/**
 * Ball volumes as numerators over one shared denominator:
 * `w(α) = buf[α] / *denominator`.
 *
 * # Safety
 * `run` must be a live handle; `buf` must hold `cap` writable slots and
 * `denominator` must be writable.
 */
enum CsStatus cs_run_w(const struct CsRun *run,
                       uint64_t *buf,
                       size_t cap,
                       size_t *written,
                       uint64_t *denominator);

/**
 * The certificate in its `key=value` text form, owned by the run.
 *
 * # Safety
 * `run` must be a live handle. The returned string is freed with
 * [`cs_string_free`].
 */
char *cs_run_certificate_text(const struct CsRun *run);

/**
 * # Safety
 * `s` must come from this library and not be freed twice. Null is ignored.
 */
void cs_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONNSUM_H */
