#ifndef UFL_H
#define UFL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define UFL_FORMAT_NATIVE 0

#define UFL_FORMAT_ORLIB 1

typedef enum UflStatus {
  UFL_STATUS_OK = 0,
  UFL_STATUS_NULL_POINTER = 1,
  UFL_STATUS_INVALID_ARGUMENT = 2,
  UFL_STATUS_PARSE = 3,
  UFL_STATUS_IO = 4,
  /**
   * The LP layer failed or could not certify a result.
   */
  UFL_STATUS_SOLVER = 5,
  UFL_STATUS_PANIC = 6,
} UflStatus;

/**
 * An optimal solution of the LP relaxation.
 */
typedef struct UflFractional UflFractional;

/**
 * The approachability frontier of a discretized game.
 */
typedef struct UflFrontier UflFrontier;

/**
 * A facility location instance.
 */
typedef struct UflInstance UflInstance;

typedef struct UflCostSplit {
  double facility;
  double connection;
  double total;
} UflCostSplit;

/**
 * Monte Carlo summary of the randomized rounding. Standard errors are NaN
 * for a single trial.
 */
typedef struct UflEstimate {
  size_t trials;
  double facility_mean;
  double facility_std_error;
  double split_facility_mean;
  double split_facility_std_error;
  double connection_mean;
  double connection_std_error;
  /**
   * Analytic bound on the expected connection cost for this `gamma`.
   */
  double connection_bound;
} UflEstimate;

typedef struct UflFrontierSummary {
  double beta_star;
  double phi_star;
  double witness_mass_at_smallest_q;
  double witness_max_other_weight;
  /**
   * Number of threshold grid points, the length `ufl_frontier_witness` fills.
   */
  size_t grid_len;
} UflFrontierSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ufl_version(void);

/**
 * Message of the last failed call on this thread, or an empty string. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *ufl_last_error(void);

/**
 * Builds an instance from `opening_cost[facilities]` and the row-major
 * `distances[clients * facilities]`.
 */
enum UflStatus ufl_instance_new(size_t facilities,
                                size_t clients,
                                const double *opening_cost,
                                const double *distances,
                                struct UflInstance **out);

/**
 * Reads an instance file; `format` is `UFL_FORMAT_NATIVE` or `UFL_FORMAT_ORLIB`.
 */
enum UflStatus ufl_instance_read(const char *path, int32_t format, struct UflInstance **out);

/**
 * Random Euclidean instance, identical to `ufl gen` for the same arguments.
 */
enum UflStatus ufl_instance_generate(size_t facilities,
                                     size_t clients,
                                     uint64_t seed,
                                     struct UflInstance **out);

enum UflStatus ufl_instance_dimensions(const struct UflInstance *inst,
                                       size_t *facilities,
                                       size_t *clients);

/**
 * Whether the distances satisfy the triangle inequality within tolerance.
 */
enum UflStatus ufl_instance_is_metric(const struct UflInstance *inst, bool *out);

void ufl_instance_free(struct UflInstance *inst);

/**
 * Solves the LP relaxation. The result keeps its own copy of the instance.
 */
enum UflStatus ufl_relaxation_solve(const struct UflInstance *inst, struct UflFractional **out);

enum UflStatus ufl_fractional_costs(const struct UflFractional *frac, struct UflCostSplit *out);

/**
 * Copies the fractional opening values into `out[len]`; `len` must be at
 * least the facility count.
 */
enum UflStatus ufl_fractional_opening(const struct UflFractional *frac, double *out, size_t len);

void ufl_fractional_free(struct UflFractional *frac);

/**
 * Filters with `gamma`, clusters, and averages `trials` independent
 * roundings. Deterministic in `seed`.
 */
enum UflStatus ufl_round_estimate(const struct UflFractional *frac,
                                  double gamma,
                                  size_t trials,
                                  uint64_t seed,
                                  struct UflEstimate *out);

/**
 * Cost of the greedy dual-ascent solution.
 */
enum UflStatus ufl_jms_solve(const struct UflInstance *inst, struct UflCostSplit *out);

/**
 * Frontier of the game on uniform grids with `k_gamma` rounding parameters
 * in `[1, gamma_max]`, `k_p` thresholds and `k_phi` supporting lines, solved
 * on `jobs` threads (0 runs on one).
 */
enum UflStatus ufl_frontier_compute(size_t k_gamma,
                                    size_t k_p,
                                    size_t k_phi,
                                    double gamma_max,
                                    bool include_jms,
                                    size_t jobs,
                                    struct UflFrontier **out);

enum UflStatus ufl_frontier_summary(const struct UflFrontier *fr, struct UflFrontierSummary *out);

/**
 * Copies the adversary's threshold grid and its weights at the optimal
 * supporting line into `q[len]` and `weight[len]`, in grid order.
 */
enum UflStatus ufl_frontier_witness(const struct UflFrontier *fr,
                                    double *q,
                                    double *weight,
                                    size_t len);

void ufl_frontier_free(struct UflFrontier *fr);

/**
 * The bifactor hardness curve `1 + 2 e^{-gamma_f}` for `gamma_f >= 1`.
 */
enum UflStatus ufl_hardness_curve(double gamma_f, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UFL_H */
