#ifndef LMCAM_H
#define LMCAM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Values 2–5 equal the CLI exit codes for the same error class.
 */
typedef enum {
  LMCAM_STATUS_OK = 0,
  LMCAM_STATUS_USAGE = 2,
  LMCAM_STATUS_SCHEMA = 3,
  LMCAM_STATUS_GEOMETRY = 4,
  LMCAM_STATUS_IO = 5,
  LMCAM_STATUS_NULL_POINTER = 10,
  LMCAM_STATUS_BUFFER_TOO_SMALL = 11,
  LMCAM_STATUS_PANIC = 12,
} LmcamStatus;

typedef struct LmcamTemplate LmcamTemplate;

typedef struct LmcamTrajectory LmcamTrajectory;

typedef struct {
  double rotation[9];
  double translation[3];
} LmcamPose;

typedef struct {
  double fx;
  double fy;
  double cx;
  double cy;
  uint32_t width;
  uint32_t height;
} LmcamIntrinsics;

/*
 Orbit camera: azimuth/elevation in degrees, distance in scene units,
 horizontal field of view in degrees.
 */
typedef struct {
  double azimuth_deg;
  double elevation_deg;
  double distance;
  double fov_deg;
} LmcamOrbit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. Valid until
 the next call on the same thread.
 */
const char *lmcam_last_error(void);

/*
 Built-in 68-point head.

 # Safety
 `out` must be a valid pointer.
 */
LmcamStatus lmcam_template_builtin(LmcamTemplate **out);

/*
 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
LmcamStatus lmcam_template_load(const char *path, LmcamTemplate **out);

/*
 Number of landmarks; 0 for a null handle.

 # Safety
 `t` must be null or a live template handle.
 */
size_t lmcam_template_len(const LmcamTemplate *t);

/*
 # Safety
 `t` must be null or a handle not yet freed.
 */
void lmcam_template_free(LmcamTemplate *t);

/*
 Projects every landmark. `out_xy` receives `2·len` pixel coordinates
 and `out_visible` `len` flags; invisible points are written as `(0, 0)`.

 # Safety
 Pointers must be valid; the buffers must hold `capacity` landmarks.
 */
LmcamStatus lmcam_project(const LmcamTemplate *t,
                          const LmcamPose *pose,
                          const LmcamIntrinsics *k,
                          double *out_xy,
                          uint8_t *out_visible,
                          size_t capacity);

/*
 Condition map for one view, PNG-encoded with the default style. Release
 the buffer with [`lmcam_buffer_free`].

 # Safety
 Pointers must be valid.
 */
LmcamStatus lmcam_condition_png(const LmcamTemplate *t,
                                const LmcamPose *pose,
                                const LmcamIntrinsics *k,
                                uint8_t **out_data,
                                size_t *out_len);

/*
 # Safety
 `data`/`len` must come from one [`lmcam_condition_png`] call.
 */
void lmcam_buffer_free(uint8_t *data, size_t len);

/*
 Camera-from-object pose from `n` 3D points (`3n` doubles) and their
 pixels (`2n` doubles).

 # Safety
 Buffers must hold `n` entries; `out` must be valid.
 */
LmcamStatus lmcam_pnp(const double *points,
                      const double *pixels,
                      size_t n,
                      const LmcamIntrinsics *k,
                      LmcamPose *out);

/*
 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
LmcamStatus lmcam_trajectory_load(const char *path, LmcamTrajectory **out);

/*
 Canonical motion (`"arc-left"`, `"zoom-in"`, ...) from an orbit base
 camera. A non-positive `magnitude` selects the motion's default.

 # Safety
 `motion` must be a NUL-terminated string; other pointers valid.
 */
LmcamStatus lmcam_trajectory_canonical(const char *motion,
                                       double magnitude,
                                       const LmcamOrbit *base,
                                       uint32_t width,
                                       uint32_t height,
                                       size_t frames,
                                       LmcamTrajectory **out);

/*
 Default frame count of the trajectory; 0 for a null handle.

 # Safety
 `t` must be null or a live trajectory handle.
 */
size_t lmcam_trajectory_frames(const LmcamTrajectory *t);

/*
 Samples `frames` cameras into caller buffers of `frames` entries.

 # Safety
 `t` must be a live handle; buffers must hold `capacity` entries.
 */
LmcamStatus lmcam_trajectory_sample(const LmcamTrajectory *t,
                                    size_t frames,
                                    LmcamPose *out_poses,
                                    LmcamIntrinsics *out_intrinsics,
                                    size_t capacity);

/*
 # Safety
 `t` must be null or a handle not yet freed.
 */
void lmcam_trajectory_free(LmcamTrajectory *t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LMCAM_H */
