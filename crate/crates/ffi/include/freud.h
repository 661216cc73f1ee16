#ifndef FREUD_H
#define FREUD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FreudMethod {
  FREUD_METHOD_HANKEL = 0,
  FREUD_METHOD_PAINLEVE = 1,
  FREUD_METHOD_ORACLE = 2,
} FreudMethod;

typedef enum FreudStatus {
  FREUD_STATUS_OK = 0,
  FREUD_STATUS_NULL_POINTER = 1,
  FREUD_STATUS_INVALID_ARGUMENT = 2,
  FREUD_STATUS_NUMERICAL_FAILURE = 3,
  FREUD_STATUS_BUFFER_TOO_SMALL = 4,
  FREUD_STATUS_PANIC = 5,
} FreudStatus;

/**
 * Weight parameters (m, t, λ) and working precision.
 */
typedef struct FreudParams FreudParams;

/**
 * Recurrence coefficients β_1 … β_N.
 */
typedef struct FreudRecurrence FreudRecurrence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *freud_version(void);

/**
 * Copies the last error message raised on this thread into `buf`.
 *
 * # Safety
 * `buf` must be valid for `len` bytes; `needed` may be null.
 */
enum FreudStatus freud_last_error(char *buf, size_t len, size_t *needed);

/**
 * Creates a parameter handle. `t` and `lambda` are exact decimals or
 * fractions such as "-0.5" or "1/3"; `bits` of 0 selects 256.
 *
 * # Safety
 * `t` and `lambda` must be NUL-terminated strings; `out` must be writable.
 */
enum FreudStatus freud_params_new(uint32_t m,
                                  const char *t,
                                  const char *lambda,
                                  uint32_t bits,
                                  struct FreudParams **out);

/**
 * Releases a parameter handle; null is ignored.
 *
 * # Safety
 * `params` must come from [`freud_params_new`] and not be used afterwards.
 */
void freud_params_free(struct FreudParams *params);

/**
 * μ_0, the total mass of the weight.
 *
 * # Safety
 * `params` must be a live handle; `out` must be writable.
 */
enum FreudStatus freud_mu0(const struct FreudParams *params, double *out);

/**
 * The moment μ_k; odd k gives 0.
 *
 * # Safety
 * `params` must be a live handle; `out` must be writable.
 */
enum FreudStatus freud_moment(const struct FreudParams *params, size_t k, double *out);

/**
 * Computes β_1 … β_count by the chosen method.
 *
 * # Safety
 * `params` must be a live handle; `out` must be writable.
 */
enum FreudStatus freud_recurrence_new(const struct FreudParams *params,
                                      size_t count,
                                      enum FreudMethod method,
                                      struct FreudRecurrence **out);

/**
 * Releases a recurrence handle; null is ignored.
 *
 * # Safety
 * `rec` must come from [`freud_recurrence_new`] and not be used afterwards.
 */
void freud_recurrence_free(struct FreudRecurrence *rec);

/**
 * Number of coefficients held; forward generation may stop short of the request.
 *
 * # Safety
 * `rec` must be a live handle; `out` must be writable.
 */
enum FreudStatus freud_recurrence_len(const struct FreudRecurrence *rec, size_t *out);

/**
 * Precision in bits at which the table was computed.
 *
 * # Safety
 * `rec` must be a live handle; `out` must be writable.
 */
enum FreudStatus freud_recurrence_precision(const struct FreudRecurrence *rec, uint32_t *out);

/**
 * β_n rounded to double.
 *
 * # Safety
 * `rec` must be a live handle; `out` must be writable.
 */
enum FreudStatus freud_beta(const struct FreudRecurrence *rec, size_t n, double *out);

/**
 * β_n as a decimal string with round-trip digits.
 *
 * # Safety
 * `rec` must be a live handle; `buf` must be valid for `len` bytes.
 */
enum FreudStatus freud_beta_str(const struct FreudRecurrence *rec,
                                size_t n,
                                char *buf,
                                size_t len,
                                size_t *needed);

/**
 * |2m V_n − 2t β_n − n − (λ + ½)(1 − (−1)^n)| for the stored table.
 *
 * # Safety
 * `rec` must be a live handle; `out` must be writable.
 */
enum FreudStatus freud_string_residual(const struct FreudRecurrence *rec, size_t n, double *out);

/**
 * The n zeros of P_n in ascending order, written to `out[0..n]`.
 * `tol` of 0 selects 2^(−bits/2).
 *
 * # Safety
 * `rec` must be a live handle; `out` must be valid for `len` doubles.
 */
enum FreudStatus freud_zeros(const struct FreudRecurrence *rec,
                             size_t n,
                             double tol,
                             double *out,
                             size_t len);

/**
 * The limiting zero density at x for exponent 2m and ratio ℓ = n/N.
 * Points outside the support give 0.
 *
 * # Safety
 * `out` must be writable.
 */
enum FreudStatus freud_density(uint32_t m, double ell, double x, double *out);

/**
 * lim β_n / n^{1/m} as n → ∞.
 *
 * # Safety
 * `out` must be writable.
 */
enum FreudStatus freud_limit_value(uint32_t m, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FREUD_H */
