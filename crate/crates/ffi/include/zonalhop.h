#ifndef ZONALHOP_H
#define ZONALHOP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes.
 */
typedef enum ZhStatus {
  ZH_STATUS_OK = 0,
  ZH_STATUS_INVALID_ARGUMENT = 1,
  ZH_STATUS_UNSUPPORTED_INDEX = 2,
  ZH_STATUS_RESOURCE_LIMIT = 3,
  ZH_STATUS_EVALUATION_FAILED = 4,
  ZH_STATUS_ACCURACY_NOT_REACHED = 5,
  ZH_STATUS_NOT_POSITIVE_DEFINITE = 6,
  ZH_STATUS_INTERNAL = 7,
  ZH_STATUS_NULL_POINTER = 8,
  ZH_STATUS_PANIC = 9,
} ZhStatus;

/**
 * Opaque interpolant handle.
 */
typedef struct ZhInterpolant ZhInterpolant;

/**
 * Opaque kernel handle.
 */
typedef struct ZhKernel ZhKernel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *zh_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *zh_version(void);

/**
 * `C^λ_n(x)`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum ZhStatus zh_gegenbauer_eval(double lambda, size_t n, double x, double *out);

/**
 * Build a kernel from a JSON descriptor. `lambda` is used by `series`
 * descriptors without their own index; pass NaN for none.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` valid for one write.
 */
enum ZhStatus zh_kernel_from_json(const char *json, double lambda, struct ZhKernel **out);

/**
 * # Safety
 * `kernel` must come from `zh_kernel_from_json` and not be used afterwards.
 */
void zh_kernel_free(struct ZhKernel *kernel);

/**
 * Kernel value at `x ∈ [-1, 1]`.
 *
 * # Safety
 * `kernel` must be a live handle; `out` valid for one write.
 */
enum ZhStatus zh_kernel_eval(const struct ZhKernel *kernel, double x, double *out);

/**
 * Transform values `f̂_λ(0..=n_max)` written to `out[0..=n_max]`.
 *
 * # Safety
 * `kernel` must be a live handle; `out` valid for `n_max + 1` writes.
 */
enum ZhStatus zh_kernel_fourier_coeffs(const struct ZhKernel *kernel,
                                       double lambda,
                                       size_t n_max,
                                       size_t order,
                                       double *out);

/**
 * Solve an interpolation problem on `S^d`. `points` holds `n` rows of
 * `d + 1` coordinates, row-major.
 *
 * # Safety
 * `points` must hold `n (d + 1)` values, `values` `n` values; `out` valid
 * for one write.
 */
enum ZhStatus zh_interpolant_solve(const struct ZhKernel *kernel,
                                   const double *points,
                                   size_t n,
                                   size_t d,
                                   const double *values,
                                   struct ZhInterpolant **out);

/**
 * # Safety
 * `itp` must come from `zh_interpolant_solve` and not be used afterwards.
 */
void zh_interpolant_free(struct ZhInterpolant *itp);

/**
 * Number of centers.
 *
 * # Safety
 * `itp` must be a live handle; `out` valid for one write.
 */
enum ZhStatus zh_interpolant_len(const struct ZhInterpolant *itp, size_t *out);

/**
 * Copy the coefficients into `out[0..len]`; `len` must equal the center
 * count.
 *
 * # Safety
 * `itp` must be a live handle; `out` valid for `len` writes.
 */
enum ZhStatus zh_interpolant_coefficients(const struct ZhInterpolant *itp, double *out, size_t len);

/**
 * `s(x)` at a unit vector of `len` coordinates.
 *
 * # Safety
 * `itp` must be a live handle; `x` must hold `len` values; `out` valid for
 * one write.
 */
enum ZhStatus zh_interpolant_eval(const struct ZhInterpolant *itp,
                                  const double *x,
                                  size_t len,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZONALHOP_H */
