use nalgebra::{DMatrix, Matrix3, Matrix3x4, Matrix6, SymmetricEigen, Vector3, Vector6};

use crate::camera::{Intrinsics, Pixel2, Point3, Pose, Rotation, EPS_DEPTH};
use crate::error::{Error, Result};

/// Relative eigenvalue ratio of the point covariance below which a cloud is
/// treated as planar.
const PLANAR_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct PnpOptions {
    pub max_iters: usize,
    /// Stop once an accepted step lowers the cost by less than this fraction.
    pub rel_tol: f64,
    pub initial_damping: f64,
}

impl Default for PnpOptions {
    fn default() -> Self {
        PnpOptions {
            max_iters: 100,
            rel_tol: 1e-12,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PnpReport {
    pub pose: Pose,
    pub iterations: usize,
    pub rms_px: f64,
}

pub fn pnp_solve(points: &[Point3], pixels: &[Pixel2], k: &Intrinsics) -> Result<Pose> {
    pnp_solve_with(points, pixels, k, &PnpOptions::default()).map(|r| r.pose)
}

/// Pose from 3D–2D correspondences: DLT initialization (≥ 6 points) or a
/// fronto-parallel guess (4–5 points), then damped Gauss–Newton on the
/// pixel reprojection error.
pub fn pnp_solve_with(
    points: &[Point3],
    pixels: &[Pixel2],
    k: &Intrinsics,
    opts: &PnpOptions,
) -> Result<PnpReport> {
    if points.len() != pixels.len() {
        return Err(Error::CountMismatch {
            expected: points.len(),
            found: pixels.len(),
        });
    }
    if points.len() < 4 {
        return Err(Error::InsufficientPoints {
            needed: 4,
            got: points.len(),
        });
    }
    check_spread(points)?;
    let init = if points.len() >= 6 {
        dlt(points, pixels, k)?
    } else {
        frontal_guess(points, pixels, k)
    };
    refine(points, pixels, k, init, opts)
}

fn centroid(points: &[Point3]) -> Vector3<f64> {
    points.iter().fold(Vector3::zeros(), |a, p| a + p.coords) / points.len() as f64
}

fn check_spread(points: &[Point3]) -> Result<()> {
    let c = centroid(points);
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p.coords - c;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov).eigenvalues;
    let mut e: Vec<f64> = eig.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    if !(e[2] > 0.0) || e[1] < PLANAR_LIMIT * e[2] {
        return Err(Error::Degenerate("points are collinear".into()));
    }
    if e[0] < PLANAR_LIMIT * e[2] {
        return Err(Error::Degenerate("points are coplanar".into()));
    }
    Ok(())
}

fn dlt(points: &[Point3], pixels: &[Pixel2], k: &Intrinsics) -> Result<Pose> {
    let n = points.len();
    let c3 = centroid(points);
    let rms3 = (points.iter().map(|p| (p.coords - c3).norm_squared()).sum::<f64>() / n as f64).sqrt();
    let s3 = 3f64.sqrt() / rms3;

    let img: Vec<_> = pixels.iter().map(|p| k.normalize(p)).collect();
    let c2 = img.iter().fold(Vector3::zeros(), |a, p| a + Vector3::new(p.x, p.y, 0.0)) / n as f64;
    let rms2 = (img
        .iter()
        .map(|p| (p.x - c2.x).powi(2) + (p.y - c2.y).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    if !(rms2 > 0.0) {
        return Err(Error::Degenerate("all pixels coincide".into()));
    }
    let s2 = 2f64.sqrt() / rms2;

    let rows = (2 * n).max(12);
    let mut a = DMatrix::<f64>::zeros(rows, 12);
    for (i, (p, x)) in points.iter().zip(&img).enumerate() {
        let q = (p.coords - c3) * s3;
        let u = (x.x - c2.x) * s2;
        let v = (x.y - c2.y) * s2;
        let h = [q.x, q.y, q.z, 1.0];
        for j in 0..4 {
            a[(2 * i, j)] = h[j];
            a[(2 * i, 8 + j)] = -u * h[j];
            a[(2 * i + 1, 4 + j)] = h[j];
            a[(2 * i + 1, 8 + j)] = -v * h[j];
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Degenerate("DLT SVD failed".into()))?;
    let order = super::descending_order(&svd.singular_values);
    let sv = &svd.singular_values;
    if sv[order[10]] < 1e-12 * sv[order[0]] {
        return Err(Error::Degenerate("DLT system rank deficient".into()));
    }
    let best = order[11];
    let p_hat = Matrix3x4::from_fn(|r, c| v_t[(best, 4 * r + c)]);

    let t2_inv = Matrix3::new(1.0 / s2, 0.0, c2.x, 0.0, 1.0 / s2, c2.y, 0.0, 0.0, 1.0);
    let mut t3 = nalgebra::Matrix4::identity() * s3;
    t3[(3, 3)] = 1.0;
    t3.fixed_view_mut::<3, 1>(0, 3).copy_from(&(-c3 * s3));
    let mut p = t2_inv * p_hat * t3;
    let mut m: Matrix3<f64> = p.fixed_view::<3, 3>(0, 0).into();
    if m.determinant() < 0.0 {
        p = -p;
        m = -m;
    }
    let sv = m.svd(false, false).singular_values;
    let scale = (sv[0] * sv[1] * sv[2]).cbrt();
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Degenerate("DLT produced a singular camera".into()));
    }
    let rotation = Rotation::project(&m)?;
    let translation = p.column(3) / scale;
    Ok(Pose { rotation, translation })
}

fn frontal_guess(points: &[Point3], pixels: &[Pixel2], k: &Intrinsics) -> Pose {
    let n = points.len() as f64;
    let c3 = centroid(points);
    let r3 = (points.iter().map(|p| (p.coords - c3).norm_squared()).sum::<f64>() / n).sqrt();
    let img: Vec<_> = pixels.iter().map(|p| k.normalize(p)).collect();
    let (mx, my) = img.iter().fold((0.0, 0.0), |(a, b), p| (a + p.x / n, b + p.y / n));
    let r2 = (img.iter().map(|p| (p.x - mx).powi(2) + (p.y - my).powi(2)).sum::<f64>() / n).sqrt();
    let z = if r2 > 0.0 { r3 / r2 } else { 1.0 };
    Pose {
        rotation: Rotation::identity(),
        translation: Vector3::new(mx * z, my * z, z) - c3,
    }
}

fn cost_of(points: &[Point3], pixels: &[Pixel2], k: &Intrinsics, pose: &Pose) -> Option<f64> {
    let mut cost = 0.0;
    for (p, px) in points.iter().zip(pixels) {
        let xc = pose.world_to_camera(p);
        if xc.z <= EPS_DEPTH {
            return None;
        }
        let u = k.fx * xc.x / xc.z + k.cx - px.x;
        let v = k.fy * xc.y / xc.z + k.cy - px.y;
        cost += u * u + v * v;
    }
    Some(cost)
}

fn refine(
    points: &[Point3],
    pixels: &[Pixel2],
    k: &Intrinsics,
    init: Pose,
    opts: &PnpOptions,
) -> Result<PnpReport> {
    let n = points.len();
    let mut pose = init;
    let Some(mut cost) = cost_of(points, pixels, k, &pose) else {
        return Err(Error::NoConvergence("initial pose puts points behind the camera".into()));
    };
    let mut lambda = opts.initial_damping;
    let mut iterations = 0;
    let mut last_rel = f64::INFINITY;
    let mut converged = false;
    while iterations < opts.max_iters {
        iterations += 1;
        if cost == 0.0 {
            converged = true;
            break;
        }
        let mut h = Matrix6::<f64>::zeros();
        let mut g = Vector6::<f64>::zeros();
        for (p, px) in points.iter().zip(pixels) {
            let rx = pose.rotation.apply(&p.coords);
            let xc = rx + pose.translation;
            let (x, y, z) = (xc.x, xc.y, xc.z);
            let ru = k.fx * x / z + k.cx - px.x;
            let rv = k.fy * y / z + k.cy - px.y;
            let du = Vector3::new(k.fx / z, 0.0, -k.fx * x / (z * z));
            let dv = Vector3::new(0.0, k.fy / z, -k.fy * y / (z * z));
            // d xc / d omega = -[R X]x for a left perturbation exp(omega)·R
            let skew = crate::epipolar::skew(&rx);
            let ju_w = -(skew.transpose() * du);
            let jv_w = -(skew.transpose() * dv);
            let ju = Vector6::new(ju_w.x, ju_w.y, ju_w.z, du.x, du.y, du.z);
            let jv = Vector6::new(jv_w.x, jv_w.y, jv_w.z, dv.x, dv.y, dv.z);
            h += ju * ju.transpose() + jv * jv.transpose();
            g += ju * ru + jv * rv;
        }
        let mut stepped = false;
        while lambda < 1e16 {
            let mut damped = h;
            for i in 0..6 {
                damped[(i, i)] += lambda * h[(i, i)].max(1e-300);
            }
            let Some(delta) = damped.cholesky().map(|c| c.solve(&(-g))) else {
                lambda *= 10.0;
                continue;
            };
            let w = Vector3::new(delta[0], delta[1], delta[2]);
            let angle = w.norm();
            let dr = if angle > 0.0 {
                Rotation::from_axis_angle(&w, angle)
            } else {
                Rotation::identity()
            };
            let candidate = Pose {
                rotation: dr.compose(&pose.rotation),
                translation: pose.translation + Vector3::new(delta[3], delta[4], delta[5]),
            };
            match cost_of(points, pixels, k, &candidate) {
                Some(c) if c < cost => {
                    last_rel = (cost - c) / cost;
                    pose = candidate;
                    cost = c;
                    lambda = (lambda / 10.0).max(1e-12);
                    stepped = true;
                    break;
                }
                _ => lambda *= 10.0,
            }
        }
        if !stepped {
            // no descent direction left: at a minimum to machine precision
            converged = true;
            break;
        }
        if last_rel < opts.rel_tol {
            converged = true;
            break;
        }
    }
    if !cost.is_finite() {
        return Err(Error::NoConvergence("non-finite cost".into()));
    }
    if !converged && last_rel > 1e-6 {
        return Err(Error::NoConvergence(format!(
            "still improving by {last_rel:e} after {iterations} iterations"
        )));
    }
    let pose = Pose {
        rotation: Rotation::project(pose.rotation.matrix())?,
        translation: pose.translation,
    };
    Ok(PnpReport {
        pose,
        iterations,
        rms_px: (cost / n as f64).sqrt(),
    })
}
