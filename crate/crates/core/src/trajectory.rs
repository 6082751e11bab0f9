//! Camera trajectories: keyframes, interpolation, sampling and the ten
//! canonical motions.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::camera::{Intrinsics, Point3, Pose, Rotation};
use crate::error::{Error, Result};

/// Frame count used when a trajectory does not say otherwise.
pub const DEFAULT_FRAMES: usize = 81;

const FOV_RANGE: std::ops::RangeInclusive<f64> = 1.0..=179.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CameraKeyframe {
    pub pose: Pose,
    pub fov_deg: f64,
    pub time: f64,
}

impl CameraKeyframe {
    pub fn new(pose: Pose, fov_deg: f64, time: f64) -> Result<Self> {
        let k = CameraKeyframe { pose, fov_deg, time };
        k.validate()?;
        Ok(k)
    }

    pub fn look_at(center: Point3, target: Point3, up: Vector3<f64>, fov_deg: f64, time: f64) -> Result<Self> {
        Self::new(Pose::look_at(&center, &target, &up)?, fov_deg, time)
    }

    /// Camera on a sphere around the origin, aimed at it with world `−y` up.
    /// Azimuth 0 puts the camera on `−z`; positive azimuth moves it toward
    /// `+x`, positive elevation toward `−y`.
    pub fn orbit(azimuth_deg: f64, elevation_deg: f64, distance: f64, fov_deg: f64, time: f64) -> Result<Self> {
        if !(distance > 0.0 && distance.is_finite()) {
            return Err(Error::InvalidKeyframes(format!("orbit distance {distance} must be positive")));
        }
        if !(elevation_deg.abs() < 90.0) {
            return Err(Error::InvalidKeyframes(format!("elevation {elevation_deg}° must lie in (−90, 90)")));
        }
        let (az, el) = (azimuth_deg.to_radians(), elevation_deg.to_radians());
        let center = Point3::new(
            distance * az.sin() * el.cos(),
            -distance * el.sin(),
            -distance * az.cos() * el.cos(),
        );
        Self::look_at(center, Point3::origin(), Vector3::new(0.0, -1.0, 0.0), fov_deg, time)
    }

    pub fn validate(&self) -> Result<()> {
        if !FOV_RANGE.contains(&self.fov_deg) {
            return Err(Error::InvalidKeyframes(format!("fov {}° outside [1, 179]", self.fov_deg)));
        }
        if !(0.0..=1.0).contains(&self.time) {
            return Err(Error::InvalidKeyframes(format!("time {} outside [0, 1]", self.time)));
        }
        Ok(())
    }

    pub fn intrinsics(&self, width: u32, height: u32) -> Result<Intrinsics> {
        Intrinsics::from_fov(self.fov_deg, width, height)
    }
}

/// Unit-quaternion slerp along the shorter arc.
pub fn slerp(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>, s: f64) -> UnitQuaternion<f64> {
    let (qa, mut qb) = (a.into_inner(), b.into_inner());
    let mut d = qa.dot(&qb);
    if d < 0.0 {
        qb = -qb;
        d = -d;
    }
    let q: Quaternion<f64> = if d > 1.0 - 1e-12 {
        qa * (1.0 - s) + qb * s
    } else {
        let th = d.min(1.0).acos();
        let sin = th.sin();
        qa * (((1.0 - s) * th).sin() / sin) + qb * ((s * th).sin() / sin)
    };
    UnitQuaternion::from_quaternion(q)
}

/// Rotation by slerp, camera-frame translation and fov linear. Endpoints
/// are returned unchanged.
///
/// Interpolating `t` in the camera frame keeps the distance to the origin
/// constant along orbits and moves the center linearly when the rotation is
/// fixed.
pub fn interpolate(a: &CameraKeyframe, b: &CameraKeyframe, s: f64) -> CameraKeyframe {
    if s <= 0.0 {
        return a.clone();
    }
    if s >= 1.0 {
        return b.clone();
    }
    let lerp = |x: f64, y: f64| x + s * (y - x);
    let q = slerp(&a.pose.rotation.to_quaternion(), &b.pose.rotation.to_quaternion(), s);
    let t = a.pose.translation + (b.pose.translation - a.pose.translation) * s;
    CameraKeyframe {
        pose: Pose {
            rotation: Rotation::from_quaternion(&q),
            translation: t,
        },
        fov_deg: lerp(a.fov_deg, b.fov_deg),
        time: lerp(a.time, b.time),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub keyframes: Vec<CameraKeyframe>,
    pub width: u32,
    pub height: u32,
    /// Sampling length used when the caller does not give one.
    pub frames: usize,
}

impl Trajectory {
    pub fn new(keyframes: Vec<CameraKeyframe>, width: u32, height: u32) -> Result<Self> {
        let t = Trajectory {
            keyframes,
            width,
            height,
            frames: DEFAULT_FRAMES,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn with_frames(mut self, frames: usize) -> Result<Self> {
        if frames == 0 {
            return Err(Error::InvalidKeyframes("frame count must be at least 1".into()));
        }
        self.frames = frames;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.keyframes.is_empty() {
            return Err(Error::InvalidKeyframes("trajectory has no keyframes".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::ZeroDimension);
        }
        for k in &self.keyframes {
            k.validate()?;
        }
        if let Some(w) = self.keyframes.windows(2).find(|w| !(w[1].time > w[0].time)) {
            return Err(Error::InvalidKeyframes(format!(
                "keyframe times must strictly increase ({} then {})",
                w[0].time, w[1].time
            )));
        }
        Ok(())
    }

    /// Camera at normalized time `t`, clamped to the keyframe range.
    pub fn at(&self, t: f64) -> CameraKeyframe {
        let ks = &self.keyframes;
        let i = ks.partition_point(|k| k.time <= t);
        if i == 0 {
            return ks[0].clone();
        }
        if i == ks.len() {
            return ks[i - 1].clone();
        }
        let (a, b) = (&ks[i - 1], &ks[i]);
        let s = (t - a.time) / (b.time - a.time);
        let mut k = interpolate(a, b, s);
        k.time = t;
        k
    }

    /// The same path traversed backward in time.
    pub fn reversed(&self) -> Trajectory {
        let keyframes = self
            .keyframes
            .iter()
            .rev()
            .map(|k| CameraKeyframe {
                time: 1.0 - k.time,
                ..k.clone()
            })
            .collect();
        Trajectory {
            keyframes,
            ..self.clone()
        }
    }
}

/// One sampled camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameCamera {
    pub time: f64,
    pub pose: Pose,
    pub fov_deg: f64,
    pub intrinsics: Intrinsics,
}

/// `f` cameras at times `j / (f − 1)`; `f = 1` gives the first keyframe.
pub fn sample(traj: &Trajectory, f: usize) -> Result<Vec<FrameCamera>> {
    traj.validate()?;
    if f == 0 {
        return Err(Error::InvalidKeyframes("frame count must be at least 1".into()));
    }
    (0..f)
        .map(|j| {
            let t = if f == 1 { traj.keyframes[0].time } else { j as f64 / (f - 1) as f64 };
            let k = traj.at(t);
            Ok(FrameCamera {
                time: t,
                pose: k.pose,
                fov_deg: k.fov_deg,
                intrinsics: k.intrinsics(traj.width, traj.height)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MotionKind {
    PanLeft,
    PanRight,
    PanUp,
    PanDown,
    ZoomIn,
    ZoomOut,
    ArcLeft,
    ArcRight,
    ArcUp,
    ArcDown,
}

impl MotionKind {
    pub const ALL: [MotionKind; 10] = [
        MotionKind::PanLeft,
        MotionKind::PanRight,
        MotionKind::PanUp,
        MotionKind::PanDown,
        MotionKind::ZoomIn,
        MotionKind::ZoomOut,
        MotionKind::ArcLeft,
        MotionKind::ArcRight,
        MotionKind::ArcUp,
        MotionKind::ArcDown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MotionKind::PanLeft => "pan-left",
            MotionKind::PanRight => "pan-right",
            MotionKind::PanUp => "pan-up",
            MotionKind::PanDown => "pan-down",
            MotionKind::ZoomIn => "zoom-in",
            MotionKind::ZoomOut => "zoom-out",
            MotionKind::ArcLeft => "arc-left",
            MotionKind::ArcRight => "arc-right",
            MotionKind::ArcUp => "arc-up",
            MotionKind::ArcDown => "arc-down",
        }
    }

    pub fn opposite(self) -> MotionKind {
        use MotionKind::*;
        match self {
            PanLeft => PanRight,
            PanRight => PanLeft,
            PanUp => PanDown,
            PanDown => PanUp,
            ZoomIn => ZoomOut,
            ZoomOut => ZoomIn,
            ArcLeft => ArcRight,
            ArcRight => ArcLeft,
            ArcUp => ArcDown,
            ArcDown => ArcUp,
        }
    }

    /// Pan: fraction of the image size; zoom: distance ratio; arc: degrees.
    pub fn default_magnitude(self) -> f64 {
        use MotionKind::*;
        match self {
            PanLeft | PanRight | PanUp | PanDown => 0.25,
            ZoomIn | ZoomOut => 1.25,
            ArcLeft | ArcRight | ArcUp | ArcDown => 30.0,
        }
    }
}

impl fmt::Display for MotionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MotionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        MotionKind::ALL
            .into_iter()
            .find(|m| m.name() == norm || m.name().replace('-', "") == norm)
            .ok_or_else(|| Error::UnknownMotion(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalMotion {
    pub kind: MotionKind,
    pub magnitude: f64,
}

impl CanonicalMotion {
    pub fn new(kind: MotionKind, magnitude: f64) -> Result<Self> {
        let valid = magnitude > 0.0
            && magnitude.is_finite()
            && match kind {
                MotionKind::ZoomIn | MotionKind::ZoomOut => magnitude != 1.0,
                MotionKind::ArcLeft | MotionKind::ArcRight | MotionKind::ArcUp | MotionKind::ArcDown => {
                    magnitude < 180.0
                }
                _ => true,
            };
        if !valid {
            return Err(Error::InvalidMagnitude(magnitude));
        }
        Ok(CanonicalMotion { kind, magnitude })
    }

    pub fn with_default_magnitude(kind: MotionKind) -> Self {
        CanonicalMotion {
            kind,
            magnitude: kind.default_magnitude(),
        }
    }

    /// Final camera of the motion started from `base`.
    pub fn apply(&self, base: &Pose, fov_deg: f64, width: u32, height: u32) -> Result<Pose> {
        use MotionKind::*;
        let k = Intrinsics::from_fov(fov_deg, width, height)?;
        let t = base.translation;
        // depth of the orbit pivot in the base camera
        let z = t.z;
        match self.kind {
            PanLeft | PanRight | PanUp | PanDown => {
                if !(z > 0.0) {
                    return Err(Error::BehindCamera { depth: z });
                }
                let (axis, extent, f) = match self.kind {
                    PanLeft | PanRight => (Vector3::x(), width as f64, k.fx),
                    _ => (Vector3::y(), height as f64, k.fy),
                };
                let sign = if matches!(self.kind, PanLeft | PanUp) { 1.0 } else { -1.0 };
                // moving the camera by −d shifts the pivot's image by
                // magnitude·extent pixels
                let shift = sign * self.magnitude * extent * z / f;
                Pose::new(base.rotation, t + axis * shift)
            }
            ZoomIn | ZoomOut => {
                let ratio = if self.kind == ZoomIn { 1.0 / self.magnitude } else { self.magnitude };
                let mut t2 = t;
                t2.z = z * ratio;
                Pose::new(base.rotation, t2)
            }
            ArcLeft | ArcRight | ArcUp | ArcDown => {
                let th = self.magnitude.to_radians();
                let (axis, angle) = match self.kind {
                    ArcLeft => (base.down_axis(), th),
                    ArcRight => (base.down_axis(), -th),
                    ArcUp => (base.right_axis(), -th),
                    _ => (base.right_axis(), th),
                };
                // rigid rotation of the camera about the origin: x_c is
                // unchanged for Q·x, so R' = R·Qᵀ and t' = t
                let q = Rotation::from_axis_angle(&axis, angle);
                Pose::new(base.rotation.compose(&q.transpose()), t)
            }
        }
    }
}

/// Two-keyframe trajectory from `base` (at time 0) to the motion's end
/// pose (at time 1).
pub fn canonical_trajectory(
    motion: &CanonicalMotion,
    base: &CameraKeyframe,
    width: u32,
    height: u32,
    frames: usize,
) -> Result<Trajectory> {
    CanonicalMotion::new(motion.kind, motion.magnitude)?;
    if frames < 2 {
        return Err(Error::InvalidKeyframes(format!("canonical trajectories need at least 2 frames, got {frames}")));
    }
    base.validate()?;
    let end = motion.apply(&base.pose, base.fov_deg, width, height)?;
    let a = CameraKeyframe { time: 0.0, ..base.clone() };
    let b = CameraKeyframe::new(end, base.fov_deg, 1.0)?;
    Trajectory::new(vec![a, b], width, height)?.with_frames(frames)
}

/// Azimuth of a camera center about the origin, degrees. Camera on `−z` is 0.
pub fn azimuth_deg(center: &Point3) -> f64 {
    center.x.atan2(-center.z).to_degrees()
}

/// Elevation of a camera center, degrees, positive toward `−y`.
pub fn elevation_deg(center: &Point3) -> f64 {
    (-center.y).atan2((center.x * center.x + center.z * center.z).sqrt()).to_degrees()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageSize {
    pub w: u32,
    pub h: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyframeRecord {
    pub time: f64,
    pub center: [f64; 3],
    pub look_at: [f64; 3],
    pub up: [f64; 3],
    pub fov_deg: f64,
}

/// Wire format of a trajectory, shared with the preview UI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryFile {
    pub image: ImageSize,
    pub keyframes: Vec<KeyframeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<usize>,
}

impl TrajectoryFile {
    pub fn from_trajectory(t: &Trajectory) -> Self {
        let arr = |v: Vector3<f64>| [v.x, v.y, v.z];
        TrajectoryFile {
            image: ImageSize { w: t.width, h: t.height },
            keyframes: t
                .keyframes
                .iter()
                .map(|k| {
                    let c = k.pose.center();
                    KeyframeRecord {
                        time: k.time,
                        center: [c.x, c.y, c.z],
                        look_at: arr(c.coords + k.pose.forward_axis()),
                        up: arr(-k.pose.down_axis()),
                        fov_deg: k.fov_deg,
                    }
                })
                .collect(),
            frames: Some(t.frames),
        }
    }

    pub fn to_trajectory(&self) -> Result<Trajectory> {
        let keyframes = self
            .keyframes
            .iter()
            .map(|r| {
                if ![r.center, r.look_at, r.up].iter().flatten().all(|v| v.is_finite()) {
                    return Err(Error::schema("non-finite keyframe coordinate"));
                }
                CameraKeyframe::look_at(
                    Point3::from(r.center),
                    Point3::from(r.look_at),
                    Vector3::from(r.up),
                    r.fov_deg,
                    r.time,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let t = Trajectory::new(keyframes, self.image.w, self.image.h)?;
        match self.frames {
            Some(f) => t.with_frames(f),
            None => Ok(t),
        }
    }
}

pub fn load_trajectory(path: &Path) -> Result<Trajectory> {
    crate::jsonio::read_json::<TrajectoryFile>(path)?.to_trajectory()
}

pub fn save_trajectory(path: &Path, t: &Trajectory) -> Result<()> {
    crate::jsonio::write_json(path, &TrajectoryFile::from_trajectory(t))
}

/// Per-frame pose table: frame index, time, row-major `R`, `t`, intrinsics.
pub fn samples_to_csv(samples: &[FrameCamera]) -> String {
    let mut out = String::from("frame,time,r00,r01,r02,r10,r11,r12,r20,r21,r22,tx,ty,tz,fx,fy,cx,cy\n");
    for (i, s) in samples.iter().enumerate() {
        let r = s.pose.rotation.matrix();
        let t = s.pose.translation;
        let k = s.intrinsics;
        let vals: Vec<String> = [
            s.time, r[(0, 0)], r[(0, 1)], r[(0, 2)], r[(1, 0)], r[(1, 1)], r[(1, 2)], r[(2, 0)],
            r[(2, 1)], r[(2, 2)], t.x, t.y, t.z, k.fx, k.fy, k.cx, k.cy,
        ]
        .iter()
        .map(|v| format!("{v:?}"))
        .collect();
        out.push_str(&format!("{i},{}\n", vals.join(",")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn base(d: f64) -> CameraKeyframe {
        CameraKeyframe::orbit(0.0, 0.0, d, 40.0, 0.0).unwrap()
    }

    fn traj(m: MotionKind, mag: f64, f: usize) -> Trajectory {
        canonical_trajectory(&CanonicalMotion::new(m, mag).unwrap(), &base(2.0), 512, 512, f).unwrap()
    }

    #[test]
    fn orbit_pose_conventions() {
        let k = base(3.0);
        assert!((k.pose.rotation.matrix() - nalgebra::Matrix3::identity()).norm() < 1e-15);
        assert!((k.pose.translation - Vector3::new(0.0, 0.0, 3.0)).norm() < 1e-15);
        let k = CameraKeyframe::orbit(-30.0, 10.0, 2.0, 40.0, 0.0).unwrap();
        let c = k.pose.center();
        assert!((azimuth_deg(&c) + 30.0).abs() < 1e-12);
        assert!((elevation_deg(&c) - 10.0).abs() < 1e-12);
        assert!(k.pose.world_to_camera(&Point3::origin()).coords.xy().norm() < 1e-12);
    }

    #[test]
    fn zero_magnitude_rejected() {
        assert!(matches!(
            CanonicalMotion::new(MotionKind::ZoomIn, 0.0),
            Err(Error::InvalidMagnitude(_))
        ));
        assert!(CanonicalMotion::new(MotionKind::PanLeft, -0.1).is_err());
        let bad = CanonicalMotion { kind: MotionKind::ArcUp, magnitude: 0.0 };
        assert!(canonical_trajectory(&bad, &base(2.0), 64, 64, 5).is_err());
    }

    #[test]
    fn arc_left_keeps_radius_and_ends_at_minus_30() {
        let t = traj(MotionKind::ArcLeft, 30.0, 81);
        let s = sample(&t, 81).unwrap();
        for c in &s {
            let r = c.pose.center().coords.norm();
            assert!((r - 2.0).abs() < 1e-9);
        }
        let last = s.last().unwrap().pose.center();
        assert!((azimuth_deg(&last) + 30.0).abs() < 1e-9);
    }

    #[test]
    fn arcs_keep_origin_on_axis() {
        for m in [MotionKind::ArcLeft, MotionKind::ArcRight, MotionKind::ArcUp, MotionKind::ArcDown] {
            for c in sample(&traj(m, 30.0, 9), 9).unwrap() {
                let o = c.pose.world_to_camera(&Point3::origin());
                assert!(o.coords.xy().norm() < 1e-12);
            }
        }
        let up = sample(&traj(MotionKind::ArcUp, 30.0, 2), 2).unwrap();
        assert!((elevation_deg(&up[1].pose.center()) - 30.0).abs() < 1e-9);
    }

    fn origin_uv(c: &FrameCamera) -> (f64, f64) {
        let p = crate::camera::project(&c.intrinsics, &c.pose.world_to_camera(&Point3::origin())).unwrap();
        (p.x, p.y)
    }

    #[test]
    fn pans_move_subject_in_image() {
        let s = sample(&traj(MotionKind::PanLeft, 0.25, 11), 11).unwrap();
        let us: Vec<f64> = s.iter().map(|c| origin_uv(c).0).collect();
        assert!(us.windows(2).all(|w| w[1] > w[0]));
        assert!((us[10] - us[0] - 128.0).abs() < 1e-9);
        let s = sample(&traj(MotionKind::PanDown, 0.25, 5), 5).unwrap();
        let vs: Vec<f64> = s.iter().map(|c| origin_uv(c).1).collect();
        assert!(vs.windows(2).all(|w| w[1] < w[0]));
        // pans translate parallel to the image plane
        for c in &s {
            assert_eq!(c.pose.rotation, s[0].pose.rotation);
            assert!((c.pose.translation.z - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zoom_is_dolly_by_ratio() {
        let s = sample(&traj(MotionKind::ZoomIn, 1.25, 3), 3).unwrap();
        assert!((s[2].pose.center().coords.norm() - 1.6).abs() < 1e-12);
        let s = sample(&traj(MotionKind::ZoomOut, 1.25, 3), 3).unwrap();
        assert!((s[2].pose.center().coords.norm() - 2.5).abs() < 1e-12);
        assert!(s.iter().all(|c| c.fov_deg == 40.0));
    }

    #[test]
    fn endpoints_exact() {
        let t = traj(MotionKind::ArcRight, 25.0, 81);
        let s = sample(&t, 81).unwrap();
        assert_eq!(s.len(), 81);
        assert_eq!(s[0].pose, t.keyframes[0].pose);
        assert_eq!(s[80].pose, t.keyframes[1].pose);
        let s2 = sample(&t, 2).unwrap();
        assert_eq!(s2[0].pose, t.keyframes[0].pose);
        assert_eq!(s2[1].pose, t.keyframes[1].pose);
        let a = &t.keyframes[0];
        let b = &t.keyframes[1];
        assert_eq!(&interpolate(a, b, 0.0), a);
        assert_eq!(&interpolate(a, b, 1.0), b);
    }

    #[test]
    fn constant_path() {
        let a = base(2.0);
        for s in [0.1, 0.5, 0.73] {
            let k = interpolate(&a, &CameraKeyframe { time: 1.0, ..a.clone() }, s);
            assert!((k.pose.rotation.matrix() - a.pose.rotation.matrix()).norm() < 1e-15);
            assert_eq!(k.pose.translation, a.pose.translation);
        }
    }

    #[test]
    fn slerp_halfway_z_rotation() {
        let a = CameraKeyframe::new(Pose::identity(), 40.0, 0.0).unwrap();
        let rz = Rotation::from_axis_angle(&Vector3::z(), FRAC_PI_2);
        let b = CameraKeyframe::new(Pose::new(rz, Vector3::zeros()).unwrap(), 40.0, 1.0).unwrap();
        let m = interpolate(&a, &b, 0.5);
        let want = Rotation::from_axis_angle(&Vector3::z(), FRAC_PI_2 / 2.0);
        assert!(m.pose.rotation.angle_to(&want) < 1e-12);
        assert!((m.pose.rotation.matrix() - want.matrix()).abs().max() < 1e-12);
    }

    #[test]
    fn slerp_takes_shorter_arc() {
        let a = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), 0.1);
        let b = UnitQuaternion::from_quaternion(-UnitQuaternion::from_axis_angle(&Vector3::y_axis(), 0.3).into_inner());
        let m = slerp(&a, &b, 0.5);
        assert!(m.angle_to(&UnitQuaternion::from_axis_angle(&Vector3::y_axis(), 0.2)) < 1e-12);
    }

    #[test]
    fn nested_sampling() {
        let t = Trajectory::new(
            vec![
                CameraKeyframe::orbit(-20.0, 5.0, 2.0, 40.0, 0.0).unwrap(),
                CameraKeyframe::orbit(10.0, -5.0, 2.5, 50.0, 0.4).unwrap(),
                CameraKeyframe::orbit(40.0, 15.0, 1.8, 30.0, 1.0).unwrap(),
            ],
            320,
            240,
        )
        .unwrap();
        let f = 17;
        let coarse = sample(&t, f).unwrap();
        let fine = sample(&t, 2 * f - 1).unwrap();
        for (j, c) in coarse.iter().enumerate() {
            let d = &fine[2 * j];
            assert!((c.pose.rotation.matrix() - d.pose.rotation.matrix()).abs().max() < 1e-12);
            assert!((c.pose.translation - d.pose.translation).abs().max() < 1e-12);
        }
    }

    #[test]
    fn reversed_trajectory_is_reversed_samples() {
        let t = Trajectory::new(
            vec![
                CameraKeyframe::orbit(-20.0, 5.0, 2.0, 40.0, 0.0).unwrap(),
                CameraKeyframe::orbit(10.0, -5.0, 2.5, 50.0, 0.3).unwrap(),
                CameraKeyframe::orbit(40.0, 15.0, 1.8, 30.0, 1.0).unwrap(),
            ],
            320,
            240,
        )
        .unwrap();
        let fwd = sample(&t, 21).unwrap();
        let rev = sample(&t.reversed(), 21).unwrap();
        for (a, b) in fwd.iter().zip(rev.iter().rev()) {
            assert!((a.pose.rotation.matrix() - b.pose.rotation.matrix()).abs().max() < 1e-12);
            assert!((a.pose.translation - b.pose.translation).abs().max() < 1e-12);
            assert!((a.fov_deg - b.fov_deg).abs() < 1e-12);
        }
    }

    #[test]
    fn single_frame_and_single_keyframe() {
        let t = Trajectory::new(vec![base(2.0)], 64, 64).unwrap();
        let s = sample(&t, 4).unwrap();
        assert!(s.iter().all(|c| c.pose == t.keyframes[0].pose));
        let t = traj(MotionKind::ArcUp, 30.0, 5);
        let s = sample(&t, 1).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].pose, t.keyframes[0].pose);
        assert!(sample(&t, 0).is_err());
    }

    #[test]
    fn keyframe_validation() {
        assert!(CameraKeyframe::orbit(0.0, 0.0, 2.0, 0.5, 0.0).is_err());
        assert!(CameraKeyframe::orbit(0.0, 0.0, 2.0, 179.5, 0.0).is_err());
        assert!(CameraKeyframe::orbit(0.0, 0.0, 2.0, 40.0, 1.5).is_err());
        let a = base(2.0);
        assert!(Trajectory::new(vec![a.clone(), a.clone()], 64, 64).is_err());
        assert!(Trajectory::new(vec![], 64, 64).is_err());
    }

    #[test]
    fn motion_names_parse() {
        for m in MotionKind::ALL {
            assert_eq!(m.name().parse::<MotionKind>().unwrap(), m);
            assert_eq!(m.opposite().opposite(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.name()));
        }
        assert_eq!("ArcLeft".parse::<MotionKind>().unwrap(), MotionKind::ArcLeft);
        assert!(matches!("dolly-zoom".parse::<MotionKind>(), Err(Error::UnknownMotion(_))));
    }

    #[test]
    fn file_round_trip() {
        let t = traj(MotionKind::ArcLeft, 30.0, 81);
        let file = TrajectoryFile::from_trajectory(&t);
        let json = serde_json::to_string(&file).unwrap();
        let back: TrajectoryFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back, file);
        let t2 = back.to_trajectory().unwrap();
        assert_eq!(t2.frames, 81);
        for (a, b) in t.keyframes.iter().zip(&t2.keyframes) {
            assert!((a.pose.rotation.matrix() - b.pose.rotation.matrix()).abs().max() < 1e-12);
            assert!((a.pose.translation - b.pose.translation).abs().max() < 1e-12);
        }
        let raw = r#"{"image":{"w":64,"h":48},"keyframes":[{"time":0,"center":[0,0,-2],"look_at":[0,0,0],"up":[0,-1,0],"fov_deg":40}]}"#;
        let t3 = serde_json::from_str::<TrajectoryFile>(raw).unwrap().to_trajectory().unwrap();
        assert_eq!(t3.frames, DEFAULT_FRAMES);
        assert!(serde_json::from_str::<TrajectoryFile>(r#"{"image":{"w":1,"h":1}}"#).is_err());
    }

    #[test]
    fn csv_has_one_row_per_frame() {
        let s = sample(&traj(MotionKind::PanUp, 0.25, 4), 4).unwrap();
        let csv = samples_to_csv(&s);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines.iter().all(|l| l.split(',').count() == 18));
    }
}
