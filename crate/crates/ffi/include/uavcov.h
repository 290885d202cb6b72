#ifndef UAVCOV_H
#define UAVCOV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define UAVCOV_SCHEME_PROPOSED 0

#define UAVCOV_SCHEME_UAV_ONLY 1

#define UAVCOV_SCHEME_GROUND_ONLY 2

/*
 Result of every fallible call.
 */
typedef enum UavcovStatus {
  UAVCOV_STATUS_OK = 0,
  UAVCOV_STATUS_NULL_POINTER = 1,
  /*
   The parameter set violates an invariant.
   */
  UAVCOV_STATUS_INVALID_PARAMS = 2,
  /*
   An argument lies outside the function's domain.
   */
  UAVCOV_STATUS_DOMAIN = 3,
  /*
   Adaptive quadrature missed its tolerance.
   */
  UAVCOV_STATUS_INTEGRATION = 4,
  /*
   Malformed TOML, key, value or string encoding.
   */
  UAVCOV_STATUS_PARSE = 5,
  UAVCOV_STATUS_IO = 6,
  /*
   A Rust panic was caught at the boundary.
   */
  UAVCOV_STATUS_PANIC = 7,
} UavcovStatus;

/*
 Opaque parameter set.
 */
typedef struct UavcovParams UavcovParams;

/*
 Coverage split by serving class.
 */
typedef struct UavcovCoverage {
  double pc1;
  double pc2;
  double pc3;
  double total;
} UavcovCoverage;

/*
 Expected shares of the disc served by each class.
 */
typedef struct UavcovAreaFractions {
  double f1;
  double f2;
  double f3;
} UavcovAreaFractions;

/*
 A simulated probability with its 95% confidence half-width.
 */
typedef struct UavcovEstimate {
  double estimate;
  double half_width;
  uint64_t samples;
} UavcovEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *uavcov_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *uavcov_version(void);

/*
 A handle holding the default parameter set. Release with
 [`uavcov_params_free`].
 */
struct UavcovParams *uavcov_params_new_default(void);

/*
 Parses a TOML document into a new handle stored in `*out`.

 # Safety
 `toml` must be a NUL-terminated string and `out` a writable pointer.
 */
enum UavcovStatus uavcov_params_from_toml(const char *toml, struct UavcovParams **out);

/*
 Releases a handle. Null is ignored.

 # Safety
 `params` must come from this library and not be used afterwards.
 */
void uavcov_params_free(struct UavcovParams *params);

/*
 Sets one field from its textual value, using the config key names.

 # Safety
 `params` must be a live handle; `key` and `value` NUL-terminated strings.
 */
enum UavcovStatus uavcov_params_set(struct UavcovParams *params,
                                    const char *key,
                                    const char *value);

/*
 Reads one field as a double.

 # Safety
 `params` must be a live handle, `key` NUL-terminated, `out` writable.
 */
enum UavcovStatus uavcov_params_get(const struct UavcovParams *params,
                                    const char *key,
                                    double *out);

/*
 Checks every invariant; the message lists all violations.

 # Safety
 `params` must be a live handle.
 */
enum UavcovStatus uavcov_params_validate(const struct UavcovParams *params);

/*
 Coverage of a user at distance `r0` from the disc centre under `scheme`.

 # Safety
 `params` must be a live handle and `out` writable.
 */
enum UavcovStatus uavcov_conditional_coverage(const struct UavcovParams *params,
                                              int scheme,
                                              double r0,
                                              struct UavcovCoverage *out);

/*
 # Safety
 `params` must be a live handle and `out` writable.
 */
enum UavcovStatus uavcov_area_fractions(const struct UavcovParams *params,
                                        struct UavcovAreaFractions *out);

/*
 Normalized spectral efficiency in nats per channel use per station.

 # Safety
 `params` must be a live handle and `out` writable.
 */
enum UavcovStatus uavcov_nse(const struct UavcovParams *params, int scheme, double *out);

/*
 CDF of the nearest-station distance for a user at `r0`.

 # Safety
 `params` must be a live handle and `out` writable.
 */
enum UavcovStatus uavcov_nearest_bs_cdf(const struct UavcovParams *params,
                                        double r0,
                                        double r,
                                        double *out);

/*
 Density of the nearest-station distance for a user at `r0`.

 # Safety
 `params` must be a live handle and `out` writable.
 */
enum UavcovStatus uavcov_nearest_bs_pdf(const struct UavcovParams *params,
                                        double r0,
                                        double r,
                                        double *out);

/*
 Laplace transform at `s` of the interference beyond the nearest station
 at `r1`, for a user at `r0`.

 # Safety
 `params` must be a live handle and `out` writable.
 */
enum UavcovStatus uavcov_laplace_i2(const struct UavcovParams *params,
                                    double r0,
                                    double r1,
                                    double s,
                                    double *out);

/*
 Monte Carlo coverage of a user at `r0` from `drops` seeded network drops.

 # Safety
 `params` must be a live handle and `out` writable.
 */
enum UavcovStatus uavcov_estimate_coverage(const struct UavcovParams *params,
                                           int scheme,
                                           double r0,
                                           uint64_t drops,
                                           uint64_t seed,
                                           struct UavcovEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UAVCOV_H */
