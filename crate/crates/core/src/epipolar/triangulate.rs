use nalgebra::{Matrix4, Point2, RowVector4, Vector3};

use crate::camera::{Intrinsics, Pixel2, Point3, Pose};
use crate::error::{Error, Result};

const MIN_RAY_ANGLE: f64 = 1e-8;

/// Linear (DLT) triangulation of a pixel pair seen from two posed cameras.
pub fn triangulate(
    pose1: &Pose,
    pose2: &Pose,
    k1: &Intrinsics,
    k2: &Intrinsics,
    p1: &Pixel2,
    p2: &Pixel2,
) -> Result<Point3> {
    triangulate_normalized(pose1, pose2, &k1.normalize(p1), &k2.normalize(p2))
}

pub(crate) fn triangulate_normalized(
    pose1: &Pose,
    pose2: &Pose,
    x1: &Point2<f64>,
    x2: &Point2<f64>,
) -> Result<Point3> {
    let c1 = pose1.center();
    let c2 = pose2.center();
    let baseline = (c1 - c2).norm();
    let scale = c1.coords.norm().max(c2.coords.norm()).max(1.0);
    if baseline <= 1e-12 * scale {
        return Err(Error::ParallelRays);
    }
    let d1 = pose1.rotation.transpose().apply(&Vector3::new(x1.x, x1.y, 1.0));
    let d2 = pose2.rotation.transpose().apply(&Vector3::new(x2.x, x2.y, 1.0));
    let angle = d1.cross(&d2).norm().atan2(d1.dot(&d2));
    if angle < MIN_RAY_ANGLE {
        return Err(Error::ParallelRays);
    }

    let rows = |pose: &Pose, x: &Point2<f64>| {
        let r = pose.rotation.matrix();
        let t = pose.translation;
        let p = |i: usize| RowVector4::new(r[(i, 0)], r[(i, 1)], r[(i, 2)], t[i]);
        let a = p(2) * x.x - p(0);
        let b = p(2) * x.y - p(1);
        (a / a.norm(), b / b.norm())
    };
    let (a0, a1) = rows(pose1, x1);
    let (a2, a3) = rows(pose2, x2);
    let a = Matrix4::from_rows(&[a0, a1, a2, a3]);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::ParallelRays)?;
    let min = (0..4)
        .min_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]))
        .unwrap();
    let h = v_t.row(min);
    if h[3].abs() < 1e-300 {
        return Err(Error::ParallelRays);
    }
    Ok(Point3::new(h[0] / h[3], h[1] / h[3], h[2] / h[3]))
}
