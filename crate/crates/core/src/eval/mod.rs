//! Camera-correctness evaluation: head-pose deltas between the first and
//! last frame of a landmark video, binary labels against the intended
//! canonical motion, and reference-based PSNR/SSIM.

mod metrics;
mod report;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::camera::{Intrinsics, Pixel2, Point3, Pose};
use crate::epipolar::pnp_solve;
use crate::error::{Error, Result};
use crate::landmarks::{LandmarkFrame2D, LandmarkTemplate3D};
use crate::trajectory::MotionKind;

pub use metrics::{psnr, psnr_frame, ssim, ssim_frame, PSNR_CAP_DB};
pub use report::{evaluate_all, evaluate_video, Aggregate, EvalReport, Psnr, VideoInput, VideoReport};

/// Minimum visible landmarks per frame for a pose estimate.
pub const MIN_VISIBLE: usize = 6;

/// Change from the first to the last frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PoseDelta {
    /// Intrinsic Y-X-Z angles of `R_last · R_firstᵀ`, degrees in (−180, 180].
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub roll_deg: f64,
    /// Centroid shift of the landmarks visible in both frames, pixels.
    pub du_px: f64,
    pub dv_px: f64,
    /// RMS landmark spread of the last frame over the first.
    pub scale_ratio: f64,
}

fn wrap_deg(a: f64) -> f64 {
    if a <= -180.0 {
        a + 360.0
    } else if a > 180.0 {
        a - 360.0
    } else {
        a
    }
}

/// `(yaw, pitch, roll)` in radians with `R = R_y(yaw)·R_x(pitch)·R_z(roll)`.
pub fn yxz_angles(r: &Matrix3<f64>) -> (f64, f64, f64) {
    let pitch = (-r[(1, 2)]).atan2((r[(1, 0)].powi(2) + r[(1, 1)].powi(2)).sqrt());
    let yaw = r[(0, 2)].atan2(r[(2, 2)]);
    let roll = r[(1, 0)].atan2(r[(1, 1)]);
    (yaw, pitch, roll)
}

fn frame_pose(
    frame: &LandmarkFrame2D,
    template: &LandmarkTemplate3D,
    k: &Intrinsics,
    label: &'static str,
) -> Result<Pose> {
    let (pts, px): (Vec<Point3>, Vec<Pixel2>) = frame.visible().map(|(i, p)| (template.points()[i], *p)).unzip();
    pnp_solve(&pts, &px, k).map_err(|e| Error::FramePose { frame: label, source: Box::new(e) })
}

fn centroid_and_spread(points: &[Pixel2]) -> (Pixel2, f64) {
    let n = points.len() as f64;
    let c = points.iter().fold(nalgebra::Vector2::zeros(), |a, p| a + p.coords) / n;
    let rms = (points.iter().map(|p| (p.coords - c).norm_squared()).sum::<f64>() / n).sqrt();
    (Pixel2::from(c), rms)
}

/// Per-frame PnP against the template, then the relative head rotation
/// and the direct image-plane centroid and spread change.
pub fn head_pose_delta(
    first: &LandmarkFrame2D,
    last: &LandmarkFrame2D,
    template: &LandmarkTemplate3D,
    k: &Intrinsics,
) -> Result<PoseDelta> {
    for (label, f) in [("first", first), ("last", last)] {
        if f.len() != template.len() {
            return Err(Error::CountMismatch { expected: template.len(), found: f.len() });
        }
        if f.visible_count() < MIN_VISIBLE {
            return Err(Error::InsufficientLandmarks { frame: label, visible: f.visible_count(), needed: MIN_VISIBLE });
        }
    }
    let p0 = frame_pose(first, template, k, "first")?;
    let p1 = frame_pose(last, template, k, "last")?;
    let rel = p1.rotation.compose(&p0.rotation.transpose());
    let (yaw, pitch, roll) = yxz_angles(rel.matrix());

    let common: Vec<usize> = (0..first.len()).filter(|&i| first.visibility[i] && last.visibility[i]).collect();
    if common.len() < MIN_VISIBLE {
        return Err(Error::InsufficientLandmarks { frame: "common", visible: common.len(), needed: MIN_VISIBLE });
    }
    let (c0, s0) = centroid_and_spread(&common.iter().map(|&i| first.points[i]).collect::<Vec<_>>());
    let (c1, s1) = centroid_and_spread(&common.iter().map(|&i| last.points[i]).collect::<Vec<_>>());
    Ok(PoseDelta {
        yaw_deg: wrap_deg(yaw.to_degrees()),
        pitch_deg: wrap_deg(pitch.to_degrees()),
        roll_deg: wrap_deg(roll.to_degrees()),
        du_px: c1.x - c0.x,
        dv_px: c1.y - c0.y,
        scale_ratio: if s0 > 0.0 { s1 / s0 } else { 1.0 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Yaw,
    Pitch,
    Du,
    Dv,
    /// `scale_ratio − 1`
    Scale,
}

impl Component {
    pub fn value(self, d: &PoseDelta) -> f64 {
        match self {
            Component::Yaw => d.yaw_deg,
            Component::Pitch => d.pitch_deg,
            Component::Du => d.du_px,
            Component::Dv => d.dv_px,
            Component::Scale => d.scale_ratio - 1.0,
        }
    }
}

/// Holds iff `sign · component > threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectnessRule {
    pub component: Component,
    pub sign: i8,
    pub threshold: f64,
}

impl CorrectnessRule {
    pub fn holds(&self, d: &PoseDelta) -> bool {
        f64::from(self.sign) * self.component.value(d) > self.threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub tau_px: f64,
    pub tau_deg: f64,
    pub tau_zoom: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { tau_px: 5.0, tau_deg: 3.0, tau_zoom: 0.05 }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tau_px", self.tau_px), ("tau_deg", self.tau_deg), ("tau_zoom", self.tau_zoom)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    /// Pans are judged by the landmark centroid shift (content moves
    /// opposite to the camera), zooms by the spread ratio, arcs by the
    /// head rotation seen in the camera.
    pub fn rule(&self, motion: MotionKind) -> CorrectnessRule {
        use Component::*;
        let (component, sign, threshold) = match motion {
            MotionKind::PanLeft => (Du, 1, self.tau_px),
            MotionKind::PanRight => (Du, -1, self.tau_px),
            MotionKind::PanUp => (Dv, 1, self.tau_px),
            MotionKind::PanDown => (Dv, -1, self.tau_px),
            MotionKind::ZoomIn => (Scale, 1, self.tau_zoom),
            MotionKind::ZoomOut => (Scale, -1, self.tau_zoom),
            MotionKind::ArcLeft => (Yaw, -1, self.tau_deg),
            MotionKind::ArcRight => (Yaw, 1, self.tau_deg),
            MotionKind::ArcUp => (Pitch, 1, self.tau_deg),
            MotionKind::ArcDown => (Pitch, -1, self.tau_deg),
        };
        CorrectnessRule { component, sign, threshold }
    }
}

pub fn correctness_label(delta: &PoseDelta, intended: MotionKind, thresholds: &Thresholds) -> bool {
    thresholds.rule(intended).holds(delta)
}

/// [`correctness_label`] for a motion given by name.
pub fn correctness_label_named(delta: &PoseDelta, intended: &str, thresholds: &Thresholds) -> Result<bool> {
    Ok(correctness_label(delta, intended.parse()?, thresholds))
}
