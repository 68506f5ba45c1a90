/* C interface for the odemmse detection library. */

#ifndef ODEMMSE_H
#define ODEMMSE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum OdemmseStatus {
  ODEMMSE_STATUS_OK = 0,
  ODEMMSE_STATUS_NULL_POINTER = 1,
  ODEMMSE_STATUS_INVALID_ARGUMENT = 2,
  ODEMMSE_STATUS_NUMERICAL_FAILURE = 3,
  ODEMMSE_STATUS_PARSE_FAILURE = 4,
} OdemmseStatus;

/**
 * A channel realization with its cached Gram eigendecomposition.
 */
typedef struct OdemmseChannel OdemmseChannel;

/**
 * A regularization schedule eta(t).
 */
typedef struct OdemmseSchedule OdemmseSchedule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread; empty after a success.
 * The caller owns the returned string and must release it with
 * `odemmse_string_free`.
 */
char *odemmse_last_error_message(void);

void odemmse_string_free(char *s);

/**
 * Draws an m x n channel with i.i.d. unit-variance circular Gaussian
 * entries, deterministically from the seed.
 */
enum OdemmseStatus odemmse_channel_generate(uintptr_t n,
                                            uintptr_t m,
                                            uint64_t seed,
                                            struct OdemmseChannel **out);

/**
 * Parses the textual channel format ("m n" header, then row-major
 * "re im" pairs).
 */
enum OdemmseStatus odemmse_channel_from_text(const char *text, struct OdemmseChannel **out);

/**
 * Round-trippable textual form of the channel; caller frees.
 */
char *odemmse_channel_to_text(const struct OdemmseChannel *channel);

/**
 * SHA-256 hex digest of the textual form; caller frees.
 */
char *odemmse_channel_hash(const struct OdemmseChannel *channel);

enum OdemmseStatus odemmse_channel_dims(const struct OdemmseChannel *channel,
                                        uintptr_t *rows,
                                        uintptr_t *cols);

void odemmse_channel_free(struct OdemmseChannel *channel);

/**
 * Constant schedule eta(t) = eta.
 */
enum OdemmseStatus odemmse_schedule_constant(double eta, struct OdemmseSchedule **out);

/**
 * Inverse-time schedule eta(t) = 1/(alpha t + epsilon) + sigma2.
 */
enum OdemmseStatus odemmse_schedule_inverse_time(double alpha,
                                                 double epsilon,
                                                 double sigma2,
                                                 struct OdemmseSchedule **out);

void odemmse_schedule_free(struct OdemmseSchedule *schedule);

/**
 * Exact constant-eta MSE at time t.
 */
enum OdemmseStatus odemmse_analytical_mse(const struct OdemmseChannel *channel,
                                          double sigma2,
                                          double eta,
                                          double t,
                                          double *out);

/**
 * MSE of the one-shot MMSE estimator.
 */
enum OdemmseStatus odemmse_mmse_mse(const struct OdemmseChannel *channel,
                                    double sigma2,
                                    double *out);

/**
 * t -> infinity limit of the constant-eta MSE.
 */
enum OdemmseStatus odemmse_asymptotic_mse(const struct OdemmseChannel *channel,
                                          double sigma2,
                                          double eta,
                                          double *out);

/**
 * Exact MSE at time t under a time-dependent schedule.
 */
enum OdemmseStatus odemmse_tode_mse(const struct OdemmseChannel *channel,
                                    double sigma2,
                                    const struct OdemmseSchedule *schedule,
                                    double t,
                                    double quad_tol,
                                    double *out);

/**
 * Convergence functional F = integral of MSE over [0, horizon].
 */
enum OdemmseStatus odemmse_convergence_functional(const struct OdemmseChannel *channel,
                                                  double sigma2,
                                                  const struct OdemmseSchedule *schedule,
                                                  double horizon,
                                                  double dt,
                                                  double quad_tol,
                                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ODEMMSE_H */
