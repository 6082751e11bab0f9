//! Landmark templates, their projection under a camera, and condition maps.

mod io;
pub mod layout;
mod raster;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::camera::{Intrinsics, Pixel2, Point3, Pose, EPS_DEPTH};
use crate::error::{Error, Result};
use crate::par::par_map;
use crate::trajectory::{sample, Trajectory};

pub use io::{
    load_landmark_frames, load_landmark_template, save_landmark_frames, save_landmark_template,
    FramePointRecord, LandmarkFramesFile, TemplateFile, TemplatePointRecord,
};
pub use raster::{rasterize, ConditionMap, GroupColors, RasterStyle};

pub const MIN_LANDMARKS: usize = 7;

/// Smallest covariance eigenvalue a normalized template must exceed.
const MIN_THICKNESS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemanticGroup {
    Contour,
    Brow,
    Eye,
    Nose,
    Lips,
    Iris,
    Other,
}

/// Scale-free 3D landmark set: centroid at the origin, RMS radius 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkTemplate3D {
    points: Vec<Point3>,
    ids: Vec<u32>,
    groups: Vec<SemanticGroup>,
    edges: Vec<(usize, usize)>,
}

impl LandmarkTemplate3D {
    /// Normalizes `points` and validates the template invariants.
    pub fn new(points: Vec<Point3>, ids: Vec<u32>, groups: Vec<SemanticGroup>) -> Result<Self> {
        if points.len() < MIN_LANDMARKS {
            return Err(Error::CountMismatch {
                expected: MIN_LANDMARKS,
                found: points.len(),
            });
        }
        if ids.len() != points.len() {
            return Err(Error::CountMismatch {
                expected: points.len(),
                found: ids.len(),
            });
        }
        if groups.len() != points.len() {
            return Err(Error::CountMismatch {
                expected: points.len(),
                found: groups.len(),
            });
        }
        let points = normalize_cloud(&points)?;
        Ok(LandmarkTemplate3D {
            points,
            ids,
            groups,
            edges: Vec::new(),
        })
    }

    /// Connectivity used by the default raster style. Out-of-range indices
    /// are rejected.
    pub fn with_edges(mut self, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = self.points.len();
        if let Some(&(a, b)) = edges.iter().find(|(a, b)| *a >= n || *b >= n) {
            return Err(Error::Schema(format!("edge ({a}, {b}) out of range for {n} points")));
        }
        self.edges = edges;
        Ok(self)
    }

    /// Built-in 68-point face layout on an ellipsoidal head.
    pub fn builtin() -> Self {
        layout::face68(0, 0.0)
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn groups(&self) -> &[SemanticGroup] {
        &self.groups
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Default raster style wired to this template's groups and edges.
    pub fn raster_style(&self) -> RasterStyle {
        RasterStyle::for_template(self)
    }
}

fn normalize_cloud(points: &[Point3]) -> Result<Vec<Point3>> {
    if points.iter().any(|p| !p.iter().all(|v| v.is_finite())) {
        return Err(Error::NormalizationFailure("non-finite coordinate".into()));
    }
    let n = points.len() as f64;
    let c = points.iter().fold(Vector3::zeros(), |a, p| a + p.coords) / n;
    let rms = (points.iter().map(|p| (p.coords - c).norm_squared()).sum::<f64>() / n).sqrt();
    if !(rms > 1e-12) {
        return Err(Error::NormalizationFailure("points collapse to a single location".into()));
    }
    let out: Vec<Point3> = points.iter().map(|p| Point3::from((p.coords - c) / rms)).collect();
    // second pass removes the residual centroid left by rounding
    let c2 = out.iter().fold(Vector3::zeros(), |a, p| a + p.coords) / n;
    let out: Vec<Point3> = out.iter().map(|p| Point3::from(p.coords - c2)).collect();

    let mut cov = Matrix3::zeros();
    for p in &out {
        cov += p.coords * p.coords.transpose();
    }
    cov /= n;
    let min_eig = SymmetricEigen::new(cov)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig <= MIN_THICKNESS {
        return Err(Error::NormalizationFailure(format!(
            "point cloud is planar (smallest covariance eigenvalue {min_eig:e})"
        )));
    }
    Ok(out)
}

/// Projected landmarks for one frame. Invisible entries carry `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkFrame2D {
    pub points: Vec<Pixel2>,
    pub visibility: Vec<bool>,
}

impl LandmarkFrame2D {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn visible_count(&self) -> usize {
        self.visibility.iter().filter(|&&v| v).count()
    }

    pub fn visible(&self) -> impl Iterator<Item = (usize, &Pixel2)> + '_ {
        self.points
            .iter()
            .enumerate()
            .filter(|(i, _)| self.visibility[*i])
    }

    /// Mean of the visible points.
    pub fn centroid(&self) -> Option<Pixel2> {
        let n = self.visible_count();
        if n == 0 {
            return None;
        }
        let (su, sv) = self.visible().fold((0.0, 0.0), |(a, b), (_, p)| (a + p.x, b + p.y));
        Some(Pixel2::new(su / n as f64, sv / n as f64))
    }
}

/// `u_k = N(K(R x_k + t))` for arbitrary (possibly unnormalized) points.
pub fn project_points(points: &[Point3], pose: &Pose, k: &Intrinsics) -> Result<LandmarkFrame2D> {
    let mut out = LandmarkFrame2D {
        points: Vec::with_capacity(points.len()),
        visibility: Vec::with_capacity(points.len()),
    };
    for p in points {
        let xc = pose.world_to_camera(p);
        if xc.z <= EPS_DEPTH {
            out.points.push(Pixel2::origin());
            out.visibility.push(false);
        } else {
            out.points.push(Pixel2::new(
                k.fx * xc.x / xc.z + k.cx,
                k.fy * xc.y / xc.z + k.cy,
            ));
            out.visibility.push(true);
        }
    }
    if out.visible_count() == 0 {
        return Err(Error::AllBehindCamera { frame: None });
    }
    Ok(out)
}

pub fn project_landmarks(
    template: &LandmarkTemplate3D,
    pose: &Pose,
    k: &Intrinsics,
) -> Result<LandmarkFrame2D> {
    project_points(template.points(), pose, k)
}

/// Per-frame output of [`condition_sequence`].
#[derive(Debug, Clone)]
pub struct ConditionSequence {
    pub maps: Vec<ConditionMap>,
    pub landmarks: Vec<LandmarkFrame2D>,
    pub cameras: Vec<(Pose, Intrinsics)>,
}

/// Condition maps along a trajectory sampled to `frames` poses. Frame `i`
/// depends only on pose `i`.
pub fn condition_sequence(
    template: &LandmarkTemplate3D,
    trajectory: &Trajectory,
    frames: usize,
    style: &RasterStyle,
) -> Result<ConditionSequence> {
    let samples = sample(trajectory, frames)?;
    let (w, h) = (trajectory.width, trajectory.height);
    let results: Vec<Result<(ConditionMap, LandmarkFrame2D)>> = par_map(&samples, |i, s| {
        let lm = project_landmarks(template, &s.pose, &s.intrinsics).map_err(|e| match e {
            Error::AllBehindCamera { .. } => Error::AllBehindCamera { frame: Some(i) },
            other => other,
        })?;
        Ok((rasterize(&lm, style, w, h), lm))
    });
    let mut out = ConditionSequence {
        maps: Vec::with_capacity(frames),
        landmarks: Vec::with_capacity(frames),
        cameras: samples.iter().map(|s| (s.pose, s.intrinsics)).collect(),
    };
    for r in results {
        let (map, lm) = r?;
        out.maps.push(map);
        out.landmarks.push(lm);
    }
    Ok(out)
}
