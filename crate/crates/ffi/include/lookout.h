/* C ABI for the lookout sampling-policy library. */

#ifndef LOOKOUT_H
#define LOOKOUT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible ABI call.
 */
typedef enum LookoutStatus {
  /**
   * The call succeeded.
   */
  LOOKOUT_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  LOOKOUT_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  LOOKOUT_STATUS_BAD_ENCODING = 2,
  /**
   * The scenario JSON failed to parse or validate.
   */
  LOOKOUT_STATUS_BAD_SCENARIO = 3,
  /**
   * An argument (grid size, tolerance, buffer length, alpha, episode
   * count) was out of range for the model.
   */
  LOOKOUT_STATUS_BAD_ARGUMENT = 4,
  /**
   * Value iteration hit its sweep cap before reaching the tolerance.
   */
  LOOKOUT_STATUS_NO_CONVERGENCE = 5,
  /**
   * Simulation episodes exceeded the step cap before announcing.
   */
  LOOKOUT_STATUS_SIM_FAILED = 6,
  /**
   * An internal panic was caught at the boundary.
   */
  LOOKOUT_STATUS_PANIC = 7,
} LookoutStatus;

/**
 * An opened scenario: model, cost vectors, and the config they came from.
 */
typedef struct LookoutModel LookoutModel;

/**
 * A solved policy on its belief grid, with two-state shape diagnostics.
 */
typedef struct LookoutSolution LookoutSolution;

/**
 * Per-episode cost estimates from a Monte-Carlo run; `*_std_error`
 * fields are standard errors of the matching means.
 */
typedef struct LookoutSimSummary {
  uint64_t episodes;
  uint64_t runaways;
  double total_mean;
  double total_std_error;
  double running_mean;
  double running_std_error;
  double stop_mean;
  double stop_std_error;
  double measurement_mean;
  double measurement_std_error;
} LookoutSimSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static C string.
 */
const char *lookout_version(void);

/**
 * Message for the most recent failure on this thread (empty when none).
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *lookout_last_error(void);

/**
 * Opens a scenario from JSON text (same schema as the CLI's scenario
 * files) and returns an owned model handle through `out`.
 *
 * # Safety
 *
 * `json` must point to a NUL-terminated string and `out` to writable
 * storage for one pointer.
 */
enum LookoutStatus lookout_model_from_json(const char *json, struct LookoutModel **out);

/**
 * Releases a model handle. Null is a no-op.
 *
 * # Safety
 *
 * `model` must have come from [`lookout_model_from_json`] and must not
 * be used afterwards.
 */
void lookout_model_free(struct LookoutModel *model);

/**
 * Number of chain states, or 0 for a null handle.
 *
 * # Safety
 *
 * `model` must be a live handle from [`lookout_model_from_json`] or null.
 */
size_t lookout_model_num_states(const struct LookoutModel *model);

/**
 * Number of sampling-interval actions, or 0 for a null handle.
 *
 * # Safety
 *
 * `model` must be a live handle from [`lookout_model_from_json`] or null.
 */
size_t lookout_model_num_actions(const struct LookoutModel *model);

/**
 * Solves the scenario by value iteration and returns a solution handle.
 *
 * `grid_points = 0` uses the scenario's grid resolution; `tol <= 0`
 * uses the scenario's tolerance.
 *
 * # Safety
 *
 * `model` must be a live handle and `out` writable storage for one
 * pointer.
 */
enum LookoutStatus lookout_solve(const struct LookoutModel *model,
                                 size_t grid_points,
                                 double tol,
                                 struct LookoutSolution **out);

/**
 * Releases a solution handle. Null is a no-op.
 *
 * # Safety
 *
 * `solution` must have come from [`lookout_solve`] and must not be used
 * afterwards.
 */
void lookout_solution_free(struct LookoutSolution *solution);

/**
 * Number of grid points covered by the solution, or 0 for null.
 *
 * # Safety
 *
 * `solution` must be a live handle from [`lookout_solve`] or null.
 */
size_t lookout_solution_len(const struct LookoutSolution *solution);

/**
 * Value-iteration sweeps performed, or 0 for null.
 *
 * # Safety
 *
 * `solution` must be a live handle from [`lookout_solve`] or null.
 */
size_t lookout_solution_iterations(const struct LookoutSolution *solution);

/**
 * Final sup-norm gap between the last two sweeps, or NaN for null.
 *
 * # Safety
 *
 * `solution` must be a live handle from [`lookout_solve`] or null.
 */
double lookout_solution_gap(const struct LookoutSolution *solution);

/**
 * Whether the stopping set passed the midpoint-convexity scan; false
 * for null.
 *
 * # Safety
 *
 * `solution` must be a live handle from [`lookout_solve`] or null.
 */
bool lookout_solution_stopping_convex(const struct LookoutSolution *solution);

/**
 * Reports whether a two-state policy is monotone (actions nonincreasing
 * in the target-state probability).
 *
 * # Safety
 *
 * `solution` must be a live handle and `out` writable storage for one
 * `bool`.
 */
enum LookoutStatus lookout_solution_monotone(const struct LookoutSolution *solution, bool *out);

/**
 * Number of interval thresholds available (0 unless the policy is a
 * monotone two-state ladder).
 *
 * # Safety
 *
 * `solution` must be a live handle from [`lookout_solve`] or null.
 */
size_t lookout_solution_num_thresholds(const struct LookoutSolution *solution);

/**
 * Copies the descending interval thresholds into `buffer`.
 *
 * # Safety
 *
 * `solution` must be a live handle and `buffer` must point to at least
 * `len` writable doubles.
 */
enum LookoutStatus lookout_solution_copy_thresholds(const struct LookoutSolution *solution,
                                                    double *buffer,
                                                    size_t len);

/**
 * Copies the optimal value at every grid point into `buffer`.
 *
 * # Safety
 *
 * `solution` must be a live handle and `buffer` must point to at least
 * `len` writable doubles.
 */
enum LookoutStatus lookout_solution_copy_values(const struct LookoutSolution *solution,
                                                double *buffer,
                                                size_t len);

/**
 * Copies the optimal action at every grid point into `buffer`
 * (0 = stop/announce, `u >= 1` = wait the u-th sampling interval).
 *
 * # Safety
 *
 * `solution` must be a live handle and `buffer` must point to at least
 * `len` writable `uint32_t`s.
 */
enum LookoutStatus lookout_solution_copy_actions(const struct LookoutSolution *solution,
                                                 uint32_t *buffer,
                                                 size_t len);

/**
 * Evaluates the solved value function at an arbitrary belief
 * (interpolated for two states, nearest grid point otherwise).
 *
 * # Safety
 *
 * `solution` must be a live handle, `belief` must point to `len`
 * readable doubles, and `out` to one writable double.
 */
enum LookoutStatus lookout_solution_value_at(const struct LookoutSolution *solution,
                                             const double *belief,
                                             size_t len,
                                             double *out);

/**
 * Looks up the policy action at an arbitrary belief via its nearest
 * grid point.
 *
 * # Safety
 *
 * `solution` must be a live handle, `belief` must point to `len`
 * readable doubles, and `out` to one writable `uint32_t`.
 */
enum LookoutStatus lookout_solution_action_at(const struct LookoutSolution *solution,
                                              const double *belief,
                                              size_t len,
                                              uint32_t *out);

/**
 * Runs seeded Monte-Carlo episodes of the solved policy from the
 * scenario's initial belief and fills `out` with cost estimates.
 * Identical seeds give bitwise-identical summaries.
 *
 * # Safety
 *
 * `model` and `solution` must be live handles (the solution must come
 * from the same model) and `out` must point to one writable summary.
 */
enum LookoutStatus lookout_simulate(const struct LookoutModel *model,
                                    const struct LookoutSolution *solution,
                                    uint64_t episodes,
                                    uint64_t seed,
                                    struct LookoutSimSummary *out);

/**
 * Scans the structural assumptions for the model and returns the report
 * as a JSON document (owned string; release with
 * [`lookout_string_free`]). Pass `alpha = NaN` to use the scenario's
 * shift constant or its canonical default.
 *
 * # Safety
 *
 * `model` must be a live handle and `out_json` writable storage for one
 * pointer.
 */
enum LookoutStatus lookout_check_json(const struct LookoutModel *model,
                                      double alpha,
                                      char **out_json);

/**
 * Releases a string returned by this library. Null is a no-op.
 *
 * # Safety
 *
 * `text` must have come from [`lookout_check_json`] and must not be
 * used afterwards.
 */
void lookout_string_free(char *text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOOKOUT_H */
