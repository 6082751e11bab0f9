//! Synthetic ground truth: a procedural landmark head, a static camera
//! rig, smooth head animation, and landmark-video rendering with exact
//! poses.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::camera::{Intrinsics, Point3, Pose, Rotation};
use crate::datagen::{write_clip, FrameSequence};
use crate::error::{Error, Result};
use crate::jsonio::write_json;
use crate::par::par_map;
use crate::landmarks::{
    layout, project_points, rasterize, save_landmark_frames, ConditionMap, LandmarkFrame2D,
    LandmarkTemplate3D, RasterStyle, SemanticGroup,
};
use crate::rng::{keyed, Rng};
use crate::trajectory::{canonical_trajectory, sample, CameraKeyframe, CanonicalMotion, FrameCamera, Trajectory};

/// Relative per-coordinate identity perturbation of [`make_head`].
pub const HEAD_JITTER: f64 = 0.05;

/// Default rig size.
pub const RIG_CAMERAS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Expression {
    /// `[0, 1]`
    pub jaw_open: f64,
    /// `[−1, 1]`
    pub brow_raise: f64,
}

/// Template plus fixed per-landmark expression displacement directions.
#[derive(Debug, Clone)]
pub struct ProceduralHead {
    pub template: LandmarkTemplate3D,
    jaw_dirs: Vec<Vector3<f64>>,
    brow_dirs: Vec<Vector3<f64>>,
}

impl ProceduralHead {
    pub fn new(template: LandmarkTemplate3D) -> Self {
        let pts = template.points();
        let ymax = pts.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
        let jaw_from = 0.2;
        let jaw_dirs = pts
            .iter()
            .map(|p| {
                let w = ((p.y - jaw_from) / (ymax - jaw_from)).clamp(0.0, 1.0);
                Vector3::new(0.0, 0.25 * w, 0.0)
            })
            .collect();
        let any_brow = template.groups().contains(&SemanticGroup::Brow);
        let brow_dirs = pts
            .iter()
            .zip(template.groups())
            .map(|(p, g)| {
                let brow = if any_brow { *g == SemanticGroup::Brow } else { p.y < -0.5 };
                if brow {
                    Vector3::new(0.0, -0.12, 0.0)
                } else {
                    Vector3::zeros()
                }
            })
            .collect();
        ProceduralHead { template, jaw_dirs, brow_dirs }
    }

    /// Template points displaced by the expression. The zero expression
    /// returns the template unchanged.
    pub fn deform(&self, e: &Expression) -> Vec<Point3> {
        let pts = self.template.points();
        if e.jaw_open == 0.0 && e.brow_raise == 0.0 {
            return pts.to_vec();
        }
        let jaw = e.jaw_open.clamp(0.0, 1.0);
        let brow = e.brow_raise.clamp(-1.0, 1.0);
        pts.iter()
            .zip(self.jaw_dirs.iter().zip(&self.brow_dirs))
            .map(|(p, (j, b))| p + j * jaw + b * brow)
            .collect()
    }
}

/// Seeded head with `m` landmarks and the default identity jitter.
pub fn make_head(seed: u64, m: usize) -> Result<ProceduralHead> {
    make_head_with(seed, m, HEAD_JITTER)
}

pub fn make_head_with(seed: u64, m: usize, jitter: f64) -> Result<ProceduralHead> {
    Ok(ProceduralHead::new(layout::procedural(m, seed, jitter)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigCamera {
    pub pose: Pose,
    pub intrinsics: Intrinsics,
    pub azimuth_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraRig {
    pub cameras: Vec<RigCamera>,
    pub radius: f64,
    pub elevation_deg: f64,
}

/// `n` cameras on a ring of the given radius and elevation, equally spaced
/// in azimuth starting at 0, each aimed at the origin.
pub fn make_rig(n: usize, radius: f64, elevation_deg: f64, k: Intrinsics) -> Result<CameraRig> {
    if n < 2 {
        return Err(Error::Config(format!("rig needs at least 2 cameras, got {n}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Config(format!("rig radius {radius} must be positive")));
    }
    if !(elevation_deg.abs() < 90.0) {
        return Err(Error::Config(format!("rig elevation {elevation_deg}° must lie in (−90, 90)")));
    }
    k.validate()?;
    let el = elevation_deg.to_radians();
    let cameras = (0..n)
        .map(|j| {
            let az_deg = 360.0 * j as f64 / n as f64;
            let az = az_deg.to_radians();
            let c = Point3::new(radius * az.sin() * el.cos(), -radius * el.sin(), -radius * az.cos() * el.cos());
            let pose = Pose::look_at(&c, &Point3::origin(), &Vector3::new(0.0, -1.0, 0.0))?;
            Ok(RigCamera { pose, intrinsics: k, azimuth_deg: az_deg })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CameraRig { cameras, radius, elevation_deg })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MotionSpec {
    pub yaw_amp_deg: f64,
    pub pitch_amp_deg: f64,
    /// Peak head translation per axis, scene units.
    pub translation_amp: [f64; 3],
    pub jaw_amp: f64,
    pub brow_amp: f64,
    /// Seeded per-frame rotation noise, degrees; 0 disables it.
    pub jitter_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneFrame {
    /// Head-to-world transform.
    pub head_pose: Pose,
    pub expression: Expression,
}

#[derive(Debug, Clone)]
pub struct AnimatedScene {
    pub head: ProceduralHead,
    pub frames: Vec<SceneFrame>,
}

impl AnimatedScene {
    pub fn static_scene(head: ProceduralHead, f: usize) -> Self {
        let rest = SceneFrame { head_pose: Pose::identity(), expression: Expression::default() };
        AnimatedScene { head, frames: vec![rest; f.max(1)] }
    }

    /// World-space landmarks of frame `i`.
    pub fn points(&self, i: usize) -> Vec<Point3> {
        let fr = &self.frames[i];
        self.head
            .deform(&fr.expression)
            .iter()
            .map(|p| fr.head_pose.world_to_camera(p))
            .collect()
    }
}

/// Sinusoidal rigid motion and expression over one period. Frame 0 is the
/// rest pose: yaw `A·sin φ`, pitch `P·sin 2φ`, translation `T·sin φ`, jaw
/// `J·(1 − cos φ)/2`, brow `B·sin φ`, with `φ = 2πi/(f − 1)`.
pub fn animate(head: &ProceduralHead, f: usize, motion: &MotionSpec, seed: u64) -> Result<AnimatedScene> {
    if f == 0 {
        return Err(Error::Config("animation needs at least 1 frame".into()));
    }
    let mut rng = keyed(seed, "animate", 0);
    let frames = (0..f)
        .map(|i| {
            let phi = if f > 1 { 2.0 * PI * i as f64 / (f - 1) as f64 } else { 0.0 };
            let yaw = motion.yaw_amp_deg.to_radians() * phi.sin();
            let pitch = motion.pitch_amp_deg.to_radians() * (2.0 * phi).sin();
            let mut r = Rotation::from_axis_angle(&Vector3::y(), yaw)
                .compose(&Rotation::from_axis_angle(&Vector3::x(), pitch));
            if motion.jitter_deg > 0.0 && i > 0 {
                let axis = Vector3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                let angle = motion.jitter_deg.to_radians() * rng.random_range(-1.0..1.0);
                if axis.norm() > 1e-6 {
                    r = Rotation::from_axis_angle(&axis, angle).compose(&r);
                }
            }
            let ta = Vector3::from(motion.translation_amp) * phi.sin();
            let head_pose = if i == 0 { Pose::identity() } else { Pose::new(r, ta)? };
            let expression = Expression {
                jaw_open: motion.jaw_amp * (1.0 - phi.cos()) / 2.0,
                brow_raise: motion.brow_amp * phi.sin(),
            };
            Ok(SceneFrame { head_pose, expression })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AnimatedScene { head: head.clone(), frames })
}

/// Output of [`render_view`].
#[derive(Debug, Clone)]
pub struct RenderedView {
    pub maps: Vec<ConditionMap>,
    pub landmarks: Vec<LandmarkFrame2D>,
    /// Per-frame camera.
    pub cameras: Vec<(Pose, Intrinsics)>,
    /// Per-frame head-to-camera transform, `camera ∘ head_pose`.
    pub head_in_camera: Vec<Pose>,
}

impl RenderedView {
    pub fn frame_sequence(&self, fps: f64) -> Result<FrameSequence> {
        FrameSequence::new(self.maps.iter().map(ConditionMap::to_image).collect(), fps)
    }
}

/// Renders every scene frame from one static camera.
pub fn render_view(scene: &AnimatedScene, camera: (Pose, Intrinsics), style: &RasterStyle) -> Result<RenderedView> {
    render_frames(scene, &vec![camera; scene.frames.len()], style)
}

/// Renders frame `i` of the scene through camera `i`. A one-frame scene is
/// held static across all cameras.
pub fn render_frames(scene: &AnimatedScene, cameras: &[(Pose, Intrinsics)], style: &RasterStyle) -> Result<RenderedView> {
    let f = cameras.len();
    if !(scene.frames.len() == f || scene.frames.len() == 1) {
        return Err(Error::DimensionMismatch(format!(
            "{} scene frames for {f} cameras",
            scene.frames.len()
        )));
    }
    let per_frame: Vec<Result<(ConditionMap, LandmarkFrame2D, Pose)>> = par_map(cameras, |i, (pose, k)| {
        let si = if scene.frames.len() == 1 { 0 } else { i };
        let lm = project_points(&scene.points(si), pose, k).map_err(|e| match e {
            Error::AllBehindCamera { .. } => Error::AllBehindCamera { frame: Some(i) },
            other => other,
        })?;
        let map = rasterize(&lm, style, k.width, k.height);
        Ok((map, lm, pose.compose(&scene.frames[si].head_pose)))
    });
    let mut out = RenderedView {
        maps: Vec::with_capacity(f),
        landmarks: Vec::with_capacity(f),
        cameras: cameras.to_vec(),
        head_in_camera: Vec::with_capacity(f),
    };
    for r in per_frame {
        let (map, lm, hc) = r?;
        out.maps.push(map);
        out.landmarks.push(lm);
        out.head_in_camera.push(hc);
    }
    Ok(out)
}

pub fn trajectory_cameras(samples: &[FrameCamera]) -> Vec<(Pose, Intrinsics)> {
    samples.iter().map(|s| (s.pose, s.intrinsics)).collect()
}

/// Renders the scene along a canonical motion starting at `base`.
pub fn render_motion(
    scene: &AnimatedScene,
    motion: &CanonicalMotion,
    base: &CameraKeyframe,
    width: u32,
    height: u32,
    frames: usize,
    style: &RasterStyle,
) -> Result<(Trajectory, RenderedView)> {
    let traj = canonical_trajectory(motion, base, width, height, frames)?;
    let view = render_frames(scene, &trajectory_cameras(&sample(&traj, frames)?), style)?;
    Ok((traj, view))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthFrame {
    pub head_pose: Pose,
    pub head_in_camera: Pose,
    pub camera: Pose,
    pub intrinsics: Intrinsics,
    pub expression: Expression,
    /// Pixel coordinates; invisible entries are `(0, 0)`.
    pub landmarks: Vec<[f64; 2]>,
    pub visibility: Vec<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub frames: Vec<GroundTruthFrame>,
}

impl GroundTruth {
    pub fn new(scene: &AnimatedScene, view: &RenderedView) -> Self {
        let frames = (0..view.cameras.len())
            .map(|i| {
                let sf = &scene.frames[if scene.frames.len() == 1 { 0 } else { i }];
                let lm = &view.landmarks[i];
                GroundTruthFrame {
                    head_pose: sf.head_pose,
                    head_in_camera: view.head_in_camera[i],
                    camera: view.cameras[i].0,
                    intrinsics: view.cameras[i].1,
                    expression: sf.expression,
                    landmarks: lm.points.iter().map(|p| [p.x, p.y]).collect(),
                    visibility: lm.visibility.clone(),
                }
            })
            .collect();
        GroundTruth { frames }
    }
}

/// Writes a view as a clip directory with `landmarks.json` and
/// `ground_truth.json`.
pub fn write_view(dir: &Path, scene: &AnimatedScene, view: &RenderedView, fps: f64) -> Result<()> {
    write_clip(dir, &view.frame_sequence(fps)?)?;
    let k = view.cameras[0].1;
    save_landmark_frames(&dir.join("landmarks.json"), &view.landmarks, scene.head.template.ids(), k.width, k.height)?;
    write_json(&dir.join("ground_truth.json"), &GroundTruth::new(scene, view))
}
