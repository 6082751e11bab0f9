//! Pinhole camera model.
//!
//! Poses map world points into the camera frame, `x_c = R·x + t`. The camera
//! looks down `+z`, image `u` grows to the right and `v` grows downward.
//! Pixel centers sit at integer coordinates.

use nalgebra::{Matrix3, Point2, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = nalgebra::Point3<f64>;
pub type Pixel2 = Point2<f64>;

/// Points closer than this to the camera plane are rejected.
pub const EPS_DEPTH: f64 = 1e-9;

const ROTATION_TOL: f64 = 1e-9;

/// A proper orthonormal 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 3]; 3]", into = "[[f64; 3]; 3]")]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    /// Validates `RᵀR = I` and `det R = +1` to 1e-9.
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if !m.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidRotation("non-finite entry".into()));
        }
        let err = (m.transpose() * m - Matrix3::identity()).abs().max();
        if err > ROTATION_TOL {
            return Err(Error::InvalidRotation(format!(
                "not orthonormal (max |RᵀR - I| = {err:e})"
            )));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > ROTATION_TOL {
            return Err(Error::InvalidRotation(format!("determinant {det}")));
        }
        Ok(Rotation(m))
    }

    /// Nearest rotation in the Frobenius sense.
    pub fn project(m: &Matrix3<f64>) -> Result<Self> {
        let svd = m.svd(true, true);
        let (u, v_t) = match (svd.u, svd.v_t) {
            (Some(u), Some(v_t)) => (u, v_t),
            _ => return Err(Error::InvalidRotation("SVD failed".into())),
        };
        let mut d = Matrix3::identity();
        if (u * v_t).determinant() < 0.0 {
            d[(2, 2)] = -1.0;
        }
        Ok(Rotation(u * d * v_t))
    }

    pub(crate) fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Rotation(m)
    }

    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let axis = nalgebra::Unit::new_normalize(*axis);
        Rotation(*Rotation3::from_axis_angle(&axis, angle).matrix())
    }

    pub fn from_quaternion(q: &UnitQuaternion<f64>) -> Self {
        Rotation(*q.to_rotation_matrix().matrix())
    }

    /// Unit quaternion view, used for interpolation.
    pub fn to_quaternion(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(self.0))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    /// `self · other`: applies `other` first.
    pub fn compose(&self, other: &Rotation) -> Self {
        Rotation(self.0 * other.0)
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// Geodesic angle in radians between two rotations.
    pub fn angle_to(&self, other: &Rotation) -> f64 {
        let rel = self.0.transpose() * other.0;
        let c = ((rel.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        // acos loses precision near 0; use the skew part for small angles
        let s = 0.5
            * Vector3::new(
                rel[(2, 1)] - rel[(1, 2)],
                rel[(0, 2)] - rel[(2, 0)],
                rel[(1, 0)] - rel[(0, 1)],
            )
            .norm();
        s.atan2(c)
    }
}

impl Default for Rotation {
    fn default() -> Self {
        Self::identity()
    }
}

impl TryFrom<[[f64; 3]; 3]> for Rotation {
    type Error = Error;

    fn try_from(rows: [[f64; 3]; 3]) -> Result<Self> {
        Rotation::new(Matrix3::from_fn(|r, c| rows[r][c]))
    }
}

impl From<Rotation> for [[f64; 3]; 3] {
    fn from(r: Rotation) -> Self {
        let m = r.0;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    }
}

/// Rigid world-to-camera transform `[R|t]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub rotation: Rotation,
    #[serde(with = "vec3_array")]
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            rotation: Rotation::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Rotation, translation: Vector3<f64>) -> Result<Self> {
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidRotation("non-finite translation".into()));
        }
        Ok(Pose {
            rotation,
            translation,
        })
    }

    /// Camera at `center` looking at `target`; `up` is the world direction
    /// that should appear toward the top of the image.
    pub fn look_at(center: &Point3, target: &Point3, up: &Vector3<f64>) -> Result<Self> {
        let forward = target - center;
        if forward.norm() < EPS_DEPTH {
            return Err(Error::Degenerate("look-at target equals camera center".into()));
        }
        let forward = forward.normalize();
        let right = forward.cross(up);
        if right.norm() < 1e-12 {
            return Err(Error::Degenerate("up vector parallel to view direction".into()));
        }
        let right = right.normalize();
        let down = forward.cross(&right);
        let r = Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        let rotation = Rotation::from_matrix_unchecked(r);
        let translation = -(r * center.coords);
        Ok(Pose {
            rotation,
            translation,
        })
    }

    pub fn world_to_camera(&self, x: &Point3) -> Point3 {
        Point3::from(self.rotation.0 * x.coords + self.translation)
    }

    /// Camera center in world coordinates, `-Rᵀt`.
    pub fn center(&self) -> Point3 {
        Point3::from(-(self.rotation.0.transpose() * self.translation))
    }

    /// `self ∘ inner`: applies `inner` first.
    pub fn compose(&self, inner: &Pose) -> Pose {
        Pose {
            rotation: self.rotation.compose(&inner.rotation),
            translation: self.rotation.0 * inner.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            rotation: rt,
            translation: -(rt.0 * self.translation),
        }
    }

    /// Camera-frame "down" axis `(0,1,0)` expressed in world coordinates.
    pub fn down_axis(&self) -> Vector3<f64> {
        self.rotation.0.row(1).transpose()
    }

    pub fn right_axis(&self) -> Vector3<f64> {
        self.rotation.0.row(0).transpose()
    }

    pub fn forward_axis(&self) -> Vector3<f64> {
        self.rotation.0.row(2).transpose()
    }
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        let k = Intrinsics {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0 && self.fx.is_finite() && self.fy.is_finite()) {
            return Err(Error::InvalidIntrinsics(format!(
                "focal lengths must be positive (fx={}, fy={})",
                self.fx, self.fy
            )));
        }
        if !(0.0..=self.width as f64).contains(&self.cx)
            || !(0.0..=self.height as f64).contains(&self.cy)
        {
            return Err(Error::InvalidIntrinsics(format!(
                "principal point ({}, {}) outside {}x{}",
                self.cx, self.cy, self.width, self.height
            )));
        }
        Ok(())
    }

    /// Square pixels from a horizontal field of view, principal point at the
    /// image center.
    pub fn from_fov(fov_deg: f64, width: u32, height: u32) -> Result<Self> {
        if !(1.0..=179.0).contains(&fov_deg) {
            return Err(Error::InvalidIntrinsics(format!("fov {fov_deg}° out of [1, 179]")));
        }
        let f = 0.5 * width as f64 / (0.5 * fov_deg.to_radians()).tan();
        Intrinsics::new(f, f, 0.5 * width as f64, 0.5 * height as f64, width, height)
    }

    /// Horizontal field of view in degrees.
    pub fn fov_deg(&self) -> f64 {
        2.0 * (0.5 * self.width as f64 / self.fx).atan().to_degrees()
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    /// Pixel to normalized image coordinates, `K⁻¹·(u, v, 1)`.
    pub fn normalize(&self, p: &Pixel2) -> Point2<f64> {
        Point2::new((p.x - self.cx) / self.fx, (p.y - self.cy) / self.fy)
    }

    pub fn denormalize(&self, x: &Point2<f64>) -> Pixel2 {
        Pixel2::new(self.fx * x.x + self.cx, self.fy * x.y + self.cy)
    }
}

pub fn world_to_camera(pose: &Pose, x: &Point3) -> Point3 {
    pose.world_to_camera(x)
}

/// `u = fx·x/z + cx`, `v = fy·y/z + cy`.
pub fn project(k: &Intrinsics, x_c: &Point3) -> Result<Pixel2> {
    if x_c.z <= EPS_DEPTH {
        return Err(Error::BehindCamera { depth: x_c.z });
    }
    Ok(Pixel2::new(
        k.fx * x_c.x / x_c.z + k.cx,
        k.fy * x_c.y / x_c.z + k.cy,
    ))
}

pub fn perspective_divide(x_c: &Point3) -> Result<(f64, f64)> {
    if x_c.z.abs() < EPS_DEPTH {
        return Err(Error::DivideByZero { depth: x_c.z });
    }
    Ok((x_c.x / x_c.z, x_c.y / x_c.z))
}

/// Global similarity scaling: points and translation scale by `alpha`,
/// rotation is unchanged.
pub fn scale_scene(points: &[Point3], pose: &Pose, alpha: f64) -> Result<(Vec<Point3>, Pose)> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidScale(alpha));
    }
    let scaled = points.iter().map(|p| Point3::from(p.coords * alpha)).collect();
    Ok((
        scaled,
        Pose {
            rotation: pose.rotation,
            translation: pose.translation * alpha,
        },
    ))
}

pub(crate) mod vec3_array {
    use nalgebra::Vector3;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Vector3<f64>, s: S) -> Result<S::Ok, S::Error> {
        [v.x, v.y, v.z].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector3<f64>, D::Error> {
        let a = <[f64; 3]>::deserialize(d)?;
        Ok(Vector3::new(a[0], a[1], a[2]))
    }
}
