//! C ABI over the `lmcam` library.
//!
//! Every fallible call returns an [`LmcamStatus`]; a non-OK status leaves
//! a message retrievable with [`lmcam_last_error`] on the calling thread.
//! Handles are opaque and owned by the caller once returned; each has a
//! matching `_free`. Rotations are row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use lmcam::camera::{Intrinsics, Pixel2, Point3, Pose, Rotation};
use lmcam::epipolar::pnp_solve;
use lmcam::landmarks::{load_landmark_template, project_landmarks, rasterize, LandmarkTemplate3D};
use lmcam::trajectory::{canonical_trajectory, load_trajectory, sample, CameraKeyframe, CanonicalMotion, Trajectory};
use lmcam::{Error, ErrorClass};
use nalgebra::{Matrix3, Vector3};

/// Values 2–5 equal the CLI exit codes for the same error class.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmcamStatus {
    Ok = 0,
    Usage = 2,
    Schema = 3,
    Geometry = 4,
    Io = 5,
    NullPointer = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmcamPose {
    pub rotation: [f64; 9],
    pub translation: [f64; 3],
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmcamIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

/// Orbit camera: azimuth/elevation in degrees, distance in scene units,
/// horizontal field of view in degrees.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmcamOrbit {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub distance: f64,
    pub fov_deg: f64,
}

pub struct LmcamTemplate(LandmarkTemplate3D);

pub struct LmcamTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Lib(Error),
    Null(&'static str),
    Small { needed: usize, capacity: usize },
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

type FfiResult = Result<(), Fail>;

fn guard(f: impl FnOnce() -> FfiResult) -> LmcamStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LmcamStatus::Ok
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            match e.class() {
                ErrorClass::Usage => LmcamStatus::Usage,
                ErrorClass::Schema => LmcamStatus::Schema,
                ErrorClass::Geometry => LmcamStatus::Geometry,
                ErrorClass::Io => LmcamStatus::Io,
            }
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("{what} is null"));
            LmcamStatus::NullPointer
        }
        Ok(Err(Fail::Small { needed, capacity })) => {
            set_error(format!("buffer holds {capacity} entries, {needed} needed"));
            LmcamStatus::BufferTooSmall
        }
        Err(_) => {
            set_error("internal panic".into());
            LmcamStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn path_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a Path, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| Error::schema(format!("{what} is not UTF-8")))?;
    Ok(Path::new(s))
}

unsafe fn put<T>(out: *mut *mut T, value: T, what: &'static str) -> FfiResult {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn to_pose(p: &LmcamPose) -> Result<Pose, Error> {
    let r = Rotation::new(Matrix3::from_row_slice(&p.rotation))?;
    Pose::new(r, Vector3::from(p.translation))
}

fn from_pose(p: &Pose) -> LmcamPose {
    let m = p.rotation.matrix();
    let mut rotation = [0.0; 9];
    for r in 0..3 {
        for c in 0..3 {
            rotation[3 * r + c] = m[(r, c)];
        }
    }
    LmcamPose { rotation, translation: [p.translation.x, p.translation.y, p.translation.z] }
}

fn to_k(k: &LmcamIntrinsics) -> Result<Intrinsics, Error> {
    Intrinsics::new(k.fx, k.fy, k.cx, k.cy, k.width, k.height)
}

fn from_k(k: &Intrinsics) -> LmcamIntrinsics {
    LmcamIntrinsics { fx: k.fx, fy: k.fy, cx: k.cx, cy: k.cy, width: k.width, height: k.height }
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call on the same thread.
#[no_mangle]
pub extern "C" fn lmcam_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Built-in 68-point head.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lmcam_template_builtin(out: *mut *mut LmcamTemplate) -> LmcamStatus {
    guard(|| put(out, LmcamTemplate(LandmarkTemplate3D::builtin()), "out"))
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lmcam_template_load(path: *const c_char, out: *mut *mut LmcamTemplate) -> LmcamStatus {
    guard(|| {
        let t = load_landmark_template(path_arg(path, "path")?)?;
        put(out, LmcamTemplate(t), "out")
    })
}

/// Number of landmarks; 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live template handle.
#[no_mangle]
pub unsafe extern "C" fn lmcam_template_len(t: *const LmcamTemplate) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lmcam_template_free(t: *mut LmcamTemplate) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Projects every landmark. `out_xy` receives `2·len` pixel coordinates
/// and `out_visible` `len` flags; invisible points are written as `(0, 0)`.
///
/// # Safety
/// Pointers must be valid; the buffers must hold `capacity` landmarks.
#[no_mangle]
pub unsafe extern "C" fn lmcam_project(
    t: *const LmcamTemplate,
    pose: *const LmcamPose,
    k: *const LmcamIntrinsics,
    out_xy: *mut f64,
    out_visible: *mut u8,
    capacity: usize,
) -> LmcamStatus {
    guard(|| {
        let t = &deref(t, "template")?.0;
        let pose = to_pose(deref(pose, "pose")?)?;
        let k = to_k(deref(k, "intrinsics")?)?;
        if out_xy.is_null() || out_visible.is_null() {
            return Err(Fail::Null("output buffer"));
        }
        if capacity < t.len() {
            return Err(Fail::Small { needed: t.len(), capacity });
        }
        let lm = project_landmarks(t, &pose, &k)?;
        let xy = std::slice::from_raw_parts_mut(out_xy, 2 * t.len());
        let vis = std::slice::from_raw_parts_mut(out_visible, t.len());
        for (i, (p, v)) in lm.points.iter().zip(&lm.visibility).enumerate() {
            xy[2 * i] = p.x;
            xy[2 * i + 1] = p.y;
            vis[i] = u8::from(*v);
        }
        Ok(())
    })
}

/// Condition map for one view, PNG-encoded with the default style. Release
/// the buffer with [`lmcam_buffer_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lmcam_condition_png(
    t: *const LmcamTemplate,
    pose: *const LmcamPose,
    k: *const LmcamIntrinsics,
    out_data: *mut *mut u8,
    out_len: *mut usize,
) -> LmcamStatus {
    guard(|| {
        let t = &deref(t, "template")?.0;
        let pose = to_pose(deref(pose, "pose")?)?;
        let k = to_k(deref(k, "intrinsics")?)?;
        if out_data.is_null() || out_len.is_null() {
            return Err(Fail::Null("output pointer"));
        }
        let lm = project_landmarks(t, &pose, &k)?;
        let png = rasterize(&lm, &t.raster_style(), k.width, k.height).png_bytes().into_boxed_slice();
        *out_len = png.len();
        *out_data = Box::into_raw(png) as *mut u8;
        Ok(())
    })
}

/// # Safety
/// `data`/`len` must come from one [`lmcam_condition_png`] call.
#[no_mangle]
pub unsafe extern "C" fn lmcam_buffer_free(data: *mut u8, len: usize) {
    if !data.is_null() {
        drop(Box::from_raw(std::ptr::slice_from_raw_parts_mut(data, len)));
    }
}

/// Camera-from-object pose from `n` 3D points (`3n` doubles) and their
/// pixels (`2n` doubles).
///
/// # Safety
/// Buffers must hold `n` entries; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lmcam_pnp(
    points: *const f64,
    pixels: *const f64,
    n: usize,
    k: *const LmcamIntrinsics,
    out: *mut LmcamPose,
) -> LmcamStatus {
    guard(|| {
        if points.is_null() || pixels.is_null() || out.is_null() {
            return Err(Fail::Null("buffer"));
        }
        let k = to_k(deref(k, "intrinsics")?)?;
        let p = std::slice::from_raw_parts(points, 3 * n);
        let q = std::slice::from_raw_parts(pixels, 2 * n);
        let pts: Vec<Point3> = p.chunks_exact(3).map(|c| Point3::new(c[0], c[1], c[2])).collect();
        let px: Vec<Pixel2> = q.chunks_exact(2).map(|c| Pixel2::new(c[0], c[1])).collect();
        *out = from_pose(&pnp_solve(&pts, &px, &k)?);
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lmcam_trajectory_load(path: *const c_char, out: *mut *mut LmcamTrajectory) -> LmcamStatus {
    guard(|| {
        let t = load_trajectory(path_arg(path, "path")?)?;
        put(out, LmcamTrajectory(t), "out")
    })
}

/// Canonical motion (`"arc-left"`, `"zoom-in"`, ...) from an orbit base
/// camera. A non-positive `magnitude` selects the motion's default.
///
/// # Safety
/// `motion` must be a NUL-terminated string; other pointers valid.
#[no_mangle]
pub unsafe extern "C" fn lmcam_trajectory_canonical(
    motion: *const c_char,
    magnitude: f64,
    base: *const LmcamOrbit,
    width: u32,
    height: u32,
    frames: usize,
    out: *mut *mut LmcamTrajectory,
) -> LmcamStatus {
    guard(|| {
        if motion.is_null() {
            return Err(Fail::Null("motion"));
        }
        let name = CStr::from_ptr(motion).to_str().map_err(|_| Error::UnknownMotion("<non-UTF-8>".into()))?;
        let kind = name.parse()?;
        let m = if magnitude > 0.0 {
            CanonicalMotion::new(kind, magnitude)?
        } else {
            CanonicalMotion::with_default_magnitude(kind)
        };
        let b = deref(base, "base")?;
        let kf = CameraKeyframe::orbit(b.azimuth_deg, b.elevation_deg, b.distance, b.fov_deg, 0.0)?;
        put(out, LmcamTrajectory(canonical_trajectory(&m, &kf, width, height, frames)?), "out")
    })
}

/// Default frame count of the trajectory; 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn lmcam_trajectory_frames(t: *const LmcamTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.0.frames)
}

/// Samples `frames` cameras into caller buffers of `frames` entries.
///
/// # Safety
/// `t` must be a live handle; buffers must hold `capacity` entries.
#[no_mangle]
pub unsafe extern "C" fn lmcam_trajectory_sample(
    t: *const LmcamTrajectory,
    frames: usize,
    out_poses: *mut LmcamPose,
    out_intrinsics: *mut LmcamIntrinsics,
    capacity: usize,
) -> LmcamStatus {
    guard(|| {
        let t = &deref(t, "trajectory")?.0;
        if out_poses.is_null() || out_intrinsics.is_null() {
            return Err(Fail::Null("output buffer"));
        }
        if capacity < frames {
            return Err(Fail::Small { needed: frames, capacity });
        }
        let s = sample(t, frames)?;
        let poses = std::slice::from_raw_parts_mut(out_poses, frames);
        let ks = std::slice::from_raw_parts_mut(out_intrinsics, frames);
        for (i, c) in s.iter().enumerate() {
            poses[i] = from_pose(&c.pose);
            ks[i] = from_k(&c.intrinsics);
        }
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lmcam_trajectory_free(t: *mut LmcamTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}
