#ifndef MALARIA_FOCP_H
#define MALARIA_FOCP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

typedef enum MfStatus {
  MF_STATUS_OK = 0,
  MF_STATUS_NULL_POINTER = 1,
  MF_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Input outside a function's mathematical domain.
   */
  MF_STATUS_DOMAIN = 3,
  /**
   * The sweep hit its iteration cap; the partial solution is still returned.
   */
  MF_STATUS_NOT_CONVERGED = 4,
  MF_STATUS_NUMERICAL_BLOWUP = 5,
  MF_STATUS_IO = 6,
  MF_STATUS_BUFFER_TOO_SMALL = 7,
  MF_STATUS_PANIC = 8,
} MfStatus;

/**
 * Trajectory columns addressable through [`mf_solution_channel`].
 */
typedef enum MfChannel {
  MF_CHANNEL_TIME = 0,
  MF_CHANNEL_SH = 1,
  MF_CHANNEL_IH = 2,
  MF_CHANNEL_RH = 3,
  MF_CHANNEL_SV = 4,
  MF_CHANNEL_IV = 5,
  MF_CHANNEL_U1 = 6,
  MF_CHANNEL_U2 = 7,
  MF_CHANNEL_U3 = 8,
  MF_CHANNEL_LAMBDA1 = 9,
  MF_CHANNEL_LAMBDA2 = 10,
  MF_CHANNEL_LAMBDA3 = 11,
  MF_CHANNEL_LAMBDA4 = 12,
  MF_CHANNEL_LAMBDA5 = 13,
} MfChannel;

typedef enum MfCostateVariant {
  MF_COSTATE_VARIANT_MECHANICAL_ADJOINT = 0,
  MF_COSTATE_VARIANT_LITERATURE = 1,
} MfCostateVariant;

/**
 * Model parameters, initial state, grid and sweep settings.
 */
typedef struct MfScenario MfScenario;

/**
 * States, costates and controls of one solved cell.
 */
typedef struct MfSolution MfSolution;

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *mf_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mf_version(void);

/**
 * Scenario with the default parameter set, initial state, grid and sweep
 * settings. Never NULL.
 */
struct MfScenario *mf_scenario_new_default(void);

/**
 * Loads a TOML scenario file into `*out`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum MfStatus mf_scenario_from_config(const char *path, struct MfScenario **out);

/**
 * # Safety
 * `scenario` must come from this library and not be freed twice. NULL is a no-op.
 */
void mf_scenario_free(struct MfScenario *scenario);

/**
 * Sets one model parameter by its config key (`lambda_h`, `eta`, `A`, ...).
 * The scenario is left unchanged on error.
 *
 * # Safety
 * `scenario` must be a live handle and `name` a NUL-terminated string.
 */
enum MfStatus mf_scenario_set_param(struct MfScenario *scenario, const char *name, double value);

/**
 * # Safety
 * `scenario` must be a live handle.
 */
enum MfStatus mf_scenario_set_initial_state(struct MfScenario *scenario,
                                            double s_h,
                                            double i_h,
                                            double r_h,
                                            double s_v,
                                            double i_v);

/**
 * # Safety
 * `scenario` must be a live handle.
 */
enum MfStatus mf_scenario_set_grid(struct MfScenario *scenario, double horizon, size_t n_steps);

/**
 * # Safety
 * `scenario` must be a live handle.
 */
enum MfStatus mf_scenario_set_sweep(struct MfScenario *scenario,
                                    double tolerance,
                                    size_t max_iterations,
                                    double relaxation);

/**
 * `variant` is an [`MfCostateVariant`] value.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
enum MfStatus mf_scenario_set_costate_variant(struct MfScenario *scenario, uint32_t variant);

/**
 * Solves one strategy at order `alpha`. Bit 0 of `mask_bits` enables bednets,
 * bit 1 treatment, bit 2 spraying.
 *
 * On `MF_STATUS_OK` and on `MF_STATUS_NOT_CONVERGED` a solution handle is
 * written to `*out`; otherwise `*out` is set to NULL.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a writable pointer.
 */
enum MfStatus mf_solve(const struct MfScenario *scenario,
                       double alpha,
                       uint32_t mask_bits,
                       struct MfSolution **out);

/**
 * # Safety
 * `solution` must come from [`mf_solve`] and not be freed twice. NULL is a no-op.
 */
void mf_solution_free(struct MfSolution *solution);

/**
 * Number of grid nodes, or 0 for NULL.
 *
 * # Safety
 * `solution` must be NULL or a live handle.
 */
size_t mf_solution_len(const struct MfSolution *solution);

/**
 * Objective value `J`, or NaN for NULL.
 *
 * # Safety
 * `solution` must be NULL or a live handle.
 */
double mf_solution_objective(const struct MfSolution *solution);

/**
 * # Safety
 * `solution` must be NULL or a live handle.
 */
size_t mf_solution_iterations(const struct MfSolution *solution);

/**
 * # Safety
 * `solution` must be NULL or a live handle.
 */
bool mf_solution_converged(const struct MfSolution *solution);

/**
 * Copies one channel (an [`MfChannel`] value) into `buf`, which must hold
 * [`mf_solution_len`] values.
 *
 * # Safety
 * `solution` must be a live handle; `buf` must be valid for `len` writes.
 */
enum MfStatus mf_solution_channel(const struct MfSolution *solution,
                                  uint32_t channel,
                                  double *buf,
                                  size_t len);

/**
 * # Safety
 * `out` must be a writable pointer.
 */
enum MfStatus mf_gamma(double x, double *out);

/**
 * One-parameter Mittag-Leffler function `E_alpha(z)` for `0 < alpha <= 1`.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum MfStatus mf_mittag_leffler(double alpha, double z, double *out);

#endif  /* MALARIA_FOCP_H */
