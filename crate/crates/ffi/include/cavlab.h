/* C ABI for the cavlab cavity-interferometry toolkit. */

#pragma once

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of a fallible call.
typedef enum CavStatus {
  CAV_STATUS_OK = 0,
  // A required pointer argument was null.
  CAV_STATUS_NULL_POINTER = 1,
  // Input validation failed; see `cav_last_error_message`.
  CAV_STATUS_INVALID_ARGUMENT = 2,
  // A numerical procedure failed (fit divergence, loop instability).
  CAV_STATUS_NUMERICAL = 3,
} CavStatus;

// Side of the resonance used for locking.
typedef enum CavLockSide {
  CAV_LOCK_SIDE_BELOW = 0,
  CAV_LOCK_SIDE_ABOVE = 1,
} CavLockSide;

// Unit tag of a time series.
typedef enum CavUnit {
  CAV_UNIT_METER = 0,
  CAV_UNIT_TRANSMISSION = 1,
} CavUnit;

// Opaque cavity geometry handle.
typedef struct CavGeometry CavGeometry;

// Opaque isolation-stage handle.
typedef struct CavStage CavStage;

// Opaque trace handle.
typedef struct CavTimeSeries CavTimeSeries;

// Side-of-fringe operating point.
typedef struct CavLockPoint {
  double offset_m;
  double transmission;
  double slope_per_m;
} CavLockPoint;

// One ring-down mode of the kick recipe.
typedef struct CavKickMode {
  double frequency_hz;
  double amplitude_m;
  double decay_time_s;
} CavKickMode;

// Servo parameters; `notch_hz <= 0` disables the notch.
typedef struct CavLockParams {
  double kp;
  double ki_per_s;
  double actuator_cutoff_hz;
  double notch_hz;
  double notch_q;
  double sensor_noise_rms;
  double sample_rate_hz;
  struct CavLockPoint setpoint;
} CavLockParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or null. Owned by the
// library; valid until the next failing call on the same thread.
const char *cav_last_error_message(void);

// Library version as a static string.
const char *cav_version(void);

// Creates a cavity geometry handle.
//
// # Safety
// `out` must be a valid pointer.
enum CavStatus cav_geometry_new(double wavelength_m,
                                double finesse,
                                uint64_t mode_number,
                                double peak_transmission,
                                struct CavGeometry **out);

// Releases a geometry handle (null is a no-op).
//
// # Safety
// `geom` must be null or a pointer from `cav_geometry_new`.
void cav_geometry_free(struct CavGeometry *geom);

// Fringe transmission at mirror separation `z_m`; NaN on a null handle.
//
// # Safety
// `geom` must be null or a valid handle.
double cav_transmission(const struct CavGeometry *geom, double z_m);

// Fringe slope dT/dz at `z_m` in 1/m; NaN on a null handle.
//
// # Safety
// `geom` must be null or a valid handle.
double cav_transmission_slope(const struct CavGeometry *geom, double z_m);

// Spatial-equivalent linewidth lambda / (2 F).
//
// # Safety
// `out` must be a valid pointer.
enum CavStatus cav_spatial_linewidth(double finesse, double wavelength_m, double *out);

// Finds the maximum-slope lock point on the chosen fringe side.
//
// # Safety
// `geom` and `out` must be valid pointers.
enum CavStatus cav_find_lock_point(const struct CavGeometry *geom,
                                   enum CavLockSide side,
                                   struct CavLockPoint *out);

// Fits the transmission fringe to `(z, transmission)` samples.
//
// # Safety
// `z_m`/`transmission` must point to `len` doubles; the `out_*` pointers
// must be valid.
enum CavStatus cav_fit_resonance(const double *z_m,
                                 const double *transmission,
                                 size_t len,
                                 double wavelength_m,
                                 double *out_peak_transmission,
                                 double *out_resonance_length_m,
                                 double *out_finesse,
                                 double *out_rms_residual);

// Creates an isolation stage from resonance frequency and damping ratio.
//
// # Safety
// `out` must be a valid pointer.
enum CavStatus cav_stage_new(double resonance_hz, double damping_ratio, struct CavStage **out);

// Creates the spring-table stage from its mechanical parameters.
//
// # Safety
// `out` must be a valid pointer.
enum CavStatus cav_stage_from_spring(double spring_constant_n_per_m,
                                     uint32_t n_springs,
                                     double payload_kg,
                                     double damping_ratio,
                                     struct CavStage **out);

// Releases a stage handle (null is a no-op).
//
// # Safety
// `stage` must be null or a pointer from a stage constructor.
void cav_stage_free(struct CavStage *stage);

// Stage resonance frequency in Hz; NaN on a null handle.
//
// # Safety
// `stage` must be null or a valid handle.
double cav_stage_resonance_hz(const struct CavStage *stage);

// Base-excitation transmissibility |H(f)|; NaN on a null handle.
//
// # Safety
// `stage` must be null or a valid handle.
double cav_stage_transmissibility(const struct CavStage *stage, double f_hz);

// Creates a trace from a sample buffer.
//
// # Safety
// `values` must point to `len` doubles; `out` must be valid.
enum CavStatus cav_timeseries_new(double dt_s,
                                  const double *values,
                                  size_t len,
                                  enum CavUnit unit,
                                  struct CavTimeSeries **out);

// Releases a trace handle (null is a no-op).
//
// # Safety
// `ts` must be null or a pointer from a trace-producing call.
void cav_timeseries_free(struct CavTimeSeries *ts);

// Number of samples; 0 on a null handle.
//
// # Safety
// `ts` must be null or a valid handle.
size_t cav_timeseries_len(const struct CavTimeSeries *ts);

// Sample interval in seconds; NaN on a null handle.
//
// # Safety
// `ts` must be null or a valid handle.
double cav_timeseries_dt_s(const struct CavTimeSeries *ts);

// Copies the samples into `buf` (capacity `cap` doubles).
//
// # Safety
// `ts` must be a valid handle and `buf` must point to `cap` doubles.
enum CavStatus cav_timeseries_copy_values(const struct CavTimeSeries *ts, double *buf, size_t cap);

// Mean-subtracted rms of a trace; NaN on a null handle.
//
// # Safety
// `ts` must be null or a valid handle.
double cav_rms(const struct CavTimeSeries *ts);

// Global peak-to-peak excursion of a trace; NaN on a null handle.
//
// # Safety
// `ts` must be null or a valid handle.
double cav_peak_to_peak(const struct CavTimeSeries *ts);

// Synthesizes a cold-plate kick train.
//
// # Safety
// `modes` must point to `n_modes` entries; `out` must be valid.
enum CavStatus cav_kick_train(double period_s,
                              const struct CavKickMode *modes,
                              size_t n_modes,
                              double broadband_floor_m_per_sqrt_hz,
                              uint64_t seed,
                              double duration_s,
                              double dt_s,
                              struct CavTimeSeries **out);

// Passes a trace through one isolation stage.
//
// # Safety
// All handles must be valid; `out` must be a valid pointer.
enum CavStatus cav_apply_stage(const struct CavTimeSeries *input,
                               const struct CavStage *stage,
                               struct CavTimeSeries **out);

// Differential cavity noise of the full isolation chain.
//
// # Safety
// All handles must be valid; `out` must be a valid pointer.
enum CavStatus cav_cavity_noise(const struct CavTimeSeries *cold_plate,
                                const struct CavStage *spring_stage,
                                const struct CavStage *fiber_stack,
                                const struct CavStage *mirror_stack,
                                struct CavTimeSeries **out);

// Converts a transmission trace to displacement around the lock point.
// `out_of_band` (optional) receives the flagged-sample count.
//
// # Safety
// `trace`, `geom` and `out` must be valid; `out_of_band` may be null.
enum CavStatus cav_transmission_to_displacement(const struct CavTimeSeries *trace,
                                                const struct CavGeometry *geom,
                                                struct CavLockPoint lock,
                                                struct CavTimeSeries **out,
                                                size_t *out_of_band);

// Forward model: displacement around the lock point to transmission.
//
// # Safety
// `trace`, `geom` and `out` must be valid.
enum CavStatus cav_displacement_to_transmission(const struct CavTimeSeries *trace,
                                                const struct CavGeometry *geom,
                                                struct CavLockPoint lock,
                                                struct CavTimeSeries **out);

// Runs the closed stabilization loop against a disturbance trace.
//
// # Safety
// `disturbance`, `geom`, `out_residual` and `out_actuator` must be valid.
enum CavStatus cav_simulate_lock(const struct CavTimeSeries *disturbance,
                                 const struct CavGeometry *geom,
                                 struct CavLockParams params,
                                 uint64_t seed,
                                 struct CavTimeSeries **out_residual,
                                 struct CavTimeSeries **out_actuator);

// Complex polariton eigenenergies, split into real and imaginary parts.
//
// # Safety
// The four `out_*` pointers must be valid.
enum CavStatus cav_polariton_eigenenergies(double exciton_energy_mev,
                                           double exciton_linewidth_mev,
                                           double cavity_linewidth_mev,
                                           double coupling_mev,
                                           double detuning_mev,
                                           double *out_upper_re,
                                           double *out_upper_im,
                                           double *out_lower_re,
                                           double *out_lower_im);

// Minimal branch separation over a detuning interval.
//
// # Safety
// `out_splitting_mev` must be valid; `out_detuning_mev` may be null.
enum CavStatus cav_normal_mode_splitting(double exciton_energy_mev,
                                         double exciton_linewidth_mev,
                                         double cavity_linewidth_mev,
                                         double coupling_mev,
                                         double detuning_min_mev,
                                         double detuning_max_mev,
                                         double *out_splitting_mev,
                                         double *out_detuning_mev);

// Cooperativity 2 S^2 / (kappa Gamma).
//
// # Safety
// `out` must be a valid pointer.
enum CavStatus cav_cooperativity(double splitting_mev,
                                 double kappa_mev,
                                 double gamma_mev,
                                 double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
