#ifndef GAITPLAN_H
#define GAITPLAN_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum GpStatus {
  GP_STATUS_OK = 0,
  GP_STATUS_NULL_POINTER = 1,
  GP_STATUS_INVALID_ARGUMENT = 2,
  GP_STATUS_HORIZON_EXPIRED = 3,
  GP_STATUS_UNREACHABLE = 4,
  GP_STATUS_INFEASIBLE = 5,
  GP_STATUS_REJECTED = 6,
  GP_STATUS_FINISHED = 7,
  GP_STATUS_INTERNAL = 8,
} GpStatus;

typedef enum GpIntegration {
  GP_INTEGRATION_EXACT_FLOW = 0,
  GP_INTEGRATION_ZERO_ORDER_HOLD = 1,
} GpIntegration;

typedef enum GpPeakGain {
  GP_PEAK_GAIN_APPROXIMATE = 0,
  GP_PEAK_GAIN_EXACT = 1,
} GpPeakGain;

typedef enum GpLeg {
  GP_LEG_RIGHT = 0,
  GP_LEG_LEFT = 1,
} GpLeg;

// Opaque single-channel planner.
typedef struct GpChannel GpChannel;

// Opaque walking pattern generator.
typedef struct GpEngine GpEngine;

typedef struct GpState3 {
  double pos;
  double vel;
  double acc;
} GpState3;

typedef struct GpGeometry {
  double l_thigh;
  double l_shin;
} GpGeometry;

// Ankle positions relative to the hip.
typedef struct GpHipRelative {
  double right_x;
  double right_y;
  double left_x;
  double left_y;
} GpHipRelative;

typedef struct GpJointAngles {
  double hip_r;
  double knee_r;
  double hip_l;
  double knee_l;
} GpJointAngles;

typedef struct GpXBoundary {
  double tf;
  double xf;
  double vxf;
  double axf;
} GpXBoundary;

// `k` is used as given; compute it with `gp_kstar` or
// `gp_exact_peak_gain`.
typedef struct GpYBoundary {
  double t0;
  double tf;
  double y0;
  double yp;
  double yf;
  double k;
} GpYBoundary;

typedef struct GpEngineConfig {
  struct GpGeometry geometry;
  double dt;
  enum GpPeakGain peak_gain;
  enum GpIntegration integration;
  // Overreach tolerated by straightening the leg, in meters.
  double reach_margin;
} GpEngineConfig;

typedef struct GpWalkParams {
  double step_length;
  double clearance;
  double stride_time;
} GpWalkParams;

// Channels are ordered `Xh, Yh, XRa, YRa, XLa, YLa`.
typedef struct GpGaitSample {
  double t;
  size_t stride;
  enum GpLeg swing;
  struct GpState3 states[6];
  double jerks[6];
  struct GpJointAngles angles;
  double overreach;
} GpGaitSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` as a
// NUL-terminated string, truncating to `len - 1` bytes. Returns the full
// message length without the terminator; zero when there is no message.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t gp_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *gp_version(void);

// Closed-form peak gain for a y-boundary.
//
// # Safety
// `k` must be null or valid for writes.
enum GpStatus gp_kstar(double t0, double tf, double y0, double yp, double yf, double *k);

// Gain whose plan from `start` at `t` peaks exactly at `yp`.
//
// # Safety
// `k` must be null or valid for writes.
enum GpStatus gp_exact_peak_gain(struct GpState3 start,
                                 double t,
                                 double tf,
                                 double yp,
                                 double yf,
                                 double *k);

// Joint angles placing both ankles at `rel`.
//
// # Safety
// `angles_out` must be null or valid for writes.
enum GpStatus gp_inverse(struct GpGeometry geom,
                         struct GpHipRelative rel,
                         struct GpJointAngles *angles_out);

// Ankle positions relative to the hip for the given joint angles.
//
// # Safety
// `rel_out` must be null or valid for writes.
enum GpStatus gp_forward(struct GpGeometry geom,
                         struct GpJointAngles a,
                         struct GpHipRelative *rel_out);

// Creates an x-channel at `start` steering to `bc`.
//
// # Safety
// `channel_out` must be null or valid for writes.
enum GpStatus gp_channel_new_x(struct GpState3 start,
                               struct GpXBoundary bc,
                               enum GpIntegration mode,
                               struct GpChannel **channel_out);

// Creates a y-channel at `start` on `bc`.
//
// # Safety
// `channel_out` must be null or valid for writes.
enum GpStatus gp_channel_new_y(struct GpState3 start,
                               struct GpYBoundary bc,
                               enum GpIntegration mode,
                               struct GpChannel **channel_out);

// Releases a channel. Null is ignored.
//
// # Safety
// `channel` must be null or come from `gp_channel_new_*` and not be used
// afterwards.
void gp_channel_free(struct GpChannel *channel);

// Advances the channel from `t` to `t + dt`.
//
// # Safety
// `channel` must be a live handle; outputs must be null or valid for writes.
// A null output is skipped.
enum GpStatus gp_channel_step(struct GpChannel *channel,
                              double t,
                              double dt,
                              struct GpState3 *state_out,
                              double *jerk_out);

// Current state of the channel.
//
// # Safety
// `channel` must be a live handle; `state_out` null or valid for writes.
enum GpStatus gp_channel_state(const struct GpChannel *channel, struct GpState3 *state_out);

// Replaces an x-channel's boundary at time `t`. The state is untouched.
//
// # Safety
// `channel` must be a live handle.
enum GpStatus gp_channel_set_x_boundary(struct GpChannel *channel,
                                        double t,
                                        struct GpXBoundary bc,
                                        double epsilon_snap);

// Re-anchors a y-channel at `t` on a new peak, endpoint and horizon and
// writes the gain in use. The peak actually used, which may be higher than
// `yp`, goes to `used_peak_out`.
//
// # Safety
// `channel` must be a live handle; outputs must be null or valid for writes.
// A null output is skipped.
enum GpStatus gp_channel_retarget_y(struct GpChannel *channel,
                                    double t,
                                    double yp,
                                    double yf,
                                    double tf,
                                    enum GpPeakGain rule,
                                    double epsilon_snap,
                                    double *k_out,
                                    double *used_peak_out);

// Engine configuration with the library defaults.
struct GpEngineConfig gp_engine_config_default(void);

// Creates a gait engine standing at the origin.
//
// # Safety
// `engine_out` must be null or valid for writes.
enum GpStatus gp_engine_new(struct GpEngineConfig config,
                            struct GpWalkParams initial,
                            struct GpEngine **engine_out);

// Releases an engine. Null is ignored.
//
// # Safety
// `engine` must be null or come from `gp_engine_new` and not be used
// afterwards.
void gp_engine_free(struct GpEngine *engine);

// Advances every channel from `t` to `t + dt`. Returns
// `GpStatus::Finished` without stepping once the closing stride has
// ended.
//
// # Safety
// `engine` must be a live handle; `sample_out` null or valid for writes.
// A null output is skipped.
enum GpStatus gp_engine_tick(struct GpEngine *engine, double t, struct GpGaitSample *sample_out);

// Changes the walking parameters at `t`. `deferred_out` receives 1 when
// the change takes effect at the next stride and 0 when applied at once.
// A rejected change returns `GpStatus::Rejected` and leaves the gait
// unchanged.
//
// # Safety
// `engine` must be a live handle; `deferred_out` null or valid for writes.
enum GpStatus gp_engine_update_params(struct GpEngine *engine,
                                      double t,
                                      struct GpWalkParams new_params,
                                      int32_t *deferred_out);

// Makes the stride carrying `closing` the last one.
//
// # Safety
// `engine` must be a live handle.
enum GpStatus gp_engine_request_stop(struct GpEngine *engine,
                                     double t,
                                     struct GpWalkParams closing);

// 1 once the closing stride has ended, 0 otherwise or for a null handle.
//
// # Safety
// `engine` must be null or a live handle.
int32_t gp_engine_finished(const struct GpEngine *engine);

// Number of completed strides; zero for a null handle.
//
// # Safety
// `engine` must be null or a live handle.
size_t gp_engine_stride_count(const struct GpEngine *engine);

// State of one channel (index 0..6, ordered as in `GpGaitSample`).
//
// # Safety
// `engine` must be a live handle; `state_out` null or valid for writes.
enum GpStatus gp_engine_channel_state(const struct GpEngine *engine,
                                      size_t index,
                                      struct GpState3 *state_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAITPLAN_H */
