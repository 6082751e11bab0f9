use nalgebra::{DMatrix, DVector, Matrix3, Point2, Vector3};

use super::triangulate::triangulate_normalized;
use super::{skew, Correspondence, EssentialMatrix, FundamentalMatrix, RelativePose};
use crate::camera::{Intrinsics, Pose, Rotation};
use crate::error::{Error, Result};

/// `E = K₂ᵀ F K₁`, projected to singular values `(1, 1, 0)`.
pub fn essential_from_fundamental(
    f: &FundamentalMatrix,
    k1: &Intrinsics,
    k2: &Intrinsics,
) -> EssentialMatrix {
    let e = k2.matrix().transpose() * f.matrix() * k1.matrix();
    // A rank-2 F with invertible K always has two nonzero singular values.
    EssentialMatrix::project(&e).expect("essential projection of a rank-2 matrix")
}

/// The four `(R, ±t)` hypotheses.
pub fn decompose_essential(e: &EssentialMatrix) -> [RelativePose; 4] {
    let svd = e.matrix().svd(true, true);
    let mut u = svd.u.expect("3x3 SVD");
    let mut v_t = svd.v_t.expect("3x3 SVD");
    // order columns so the null direction is last
    let s = svd.singular_values;
    let null = (0..3).min_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
    if null != 2 {
        u.swap_columns(null, 2);
        v_t.swap_rows(null, 2);
    }
    if u.determinant() < 0.0 {
        u = -u;
    }
    if v_t.determinant() < 0.0 {
        v_t = -v_t;
    }
    let w = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    let r1 = Rotation::from_matrix_unchecked(u * w * v_t);
    let r2 = Rotation::from_matrix_unchecked(u * w.transpose() * v_t);
    let t = u.column(2).normalize();
    [
        RelativePose { rotation: r1, translation_dir: t },
        RelativePose { rotation: r1, translation_dir: -t },
        RelativePose { rotation: r2, translation_dir: t },
        RelativePose { rotation: r2, translation_dir: -t },
    ]
}

/// Picks the hypothesis with the most correspondences in front of both
/// cameras; ties go to the larger summed depth margin.
pub fn cheirality_select(
    hyps: &[RelativePose],
    corrs: &[Correspondence],
    k1: &Intrinsics,
    k2: &Intrinsics,
) -> Result<RelativePose> {
    if corrs.is_empty() {
        return Err(Error::InsufficientPoints { needed: 1, got: 0 });
    }
    let n1: Vec<Point2<f64>> = corrs.iter().map(|c| k1.normalize(&c.p1)).collect();
    let n2: Vec<Point2<f64>> = corrs.iter().map(|c| k2.normalize(&c.p2)).collect();
    let first = Pose::identity();
    let mut best: Option<(usize, f64, RelativePose)> = None;
    for h in hyps {
        let second = h.as_pose();
        let (mut count, mut margin) = (0usize, 0.0f64);
        for (a, b) in n1.iter().zip(&n2) {
            let Ok(x) = triangulate_normalized(&first, &second, a, b) else {
                continue;
            };
            let z1 = x.z;
            let z2 = second.world_to_camera(&x).z;
            if z1 > 0.0 && z2 > 0.0 {
                count += 1;
            }
            margin += z1.min(z2);
        }
        let better = match &best {
            None => true,
            Some((c, m, _)) => count > *c || (count == *c && margin > *m),
        };
        if better {
            best = Some((count, margin, *h));
        }
    }
    match best {
        Some((c, _, h)) if c > 0 => Ok(h),
        _ => Err(Error::NoValidHypothesis),
    }
}

/// Levenberg–Marquardt on the summed squared Sampson distance over the
/// five degrees of freedom of `(R, t̂)`. Returns `init` unchanged when
/// fewer than five correspondences are given.
pub fn refine_relative_pose(
    init: &RelativePose,
    corrs: &[Correspondence],
    k1: &Intrinsics,
    k2: &Intrinsics,
) -> RelativePose {
    if corrs.len() < 5 {
        return *init;
    }
    let (Some(k1i), Some(k2i)) = (k1.matrix().try_inverse(), k2.matrix().try_inverse()) else {
        return *init;
    };
    let k2it = k2i.transpose();
    let residuals = |rel: &RelativePose, out: &mut DVector<f64>| {
        let f = k2it * skew(&rel.translation_dir) * rel.rotation.matrix() * k1i;
        for (r, c) in out.iter_mut().zip(corrs) {
            let x1 = Vector3::new(c.p1.x, c.p1.y, 1.0);
            let x2 = Vector3::new(c.p2.x, c.p2.y, 1.0);
            let fx1 = f * x1;
            let ftx2 = f.transpose() * x2;
            let den = fx1.x * fx1.x + fx1.y * fx1.y + ftx2.x * ftx2.x + ftx2.y * ftx2.y;
            *r = if den > 0.0 { x2.dot(&fx1) / den.sqrt() } else { 0.0 };
        }
    };
    let step = |rel: &RelativePose, d: &[f64]| -> RelativePose {
        let t = rel.translation_dir;
        let b1 = if t.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let b1 = (b1 - t * t.dot(&b1)).normalize();
        let b2 = t.cross(&b1);
        let w = Vector3::new(d[0], d[1], d[2]);
        let dr = match w.norm() {
            n if n > 0.0 => Rotation::from_axis_angle(&(w / n), n),
            _ => Rotation::identity(),
        };
        RelativePose {
            rotation: dr.compose(&rel.rotation),
            translation_dir: (t + b1 * d[3] + b2 * d[4]).normalize(),
        }
    };

    let n = corrs.len();
    let mut cur = *init;
    let mut r = DVector::zeros(n);
    residuals(&cur, &mut r);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let (mut rp, mut rm) = (DVector::zeros(n), DVector::zeros(n));
    for _ in 0..100 {
        let mut j = DMatrix::zeros(n, 5);
        for k in 0..5 {
            let h = 1e-7;
            let mut d = [0.0; 5];
            d[k] = h;
            residuals(&step(&cur, &d), &mut rp);
            d[k] = -h;
            residuals(&step(&cur, &d), &mut rm);
            j.set_column(k, &((&rp - &rm) / (2.0 * h)));
        }
        let jtj = j.transpose() * &j;
        let jtr = j.transpose() * &r;
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for k in 0..5 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(delta) = a.cholesky().map(|c| c.solve(&-&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let cand = step(&cur, delta.as_slice());
            residuals(&cand, &mut rp);
            let c = rp.norm_squared();
            if c < cost {
                let rel_change = (cost - c) / cost.max(f64::MIN_POSITIVE);
                cur = RelativePose { rotation: Rotation::project(cand.rotation.matrix()).unwrap_or(cand.rotation), ..cand };
                std::mem::swap(&mut r, &mut rp);
                cost = c;
                lambda = (lambda * 0.1).max(1e-12);
                improved = rel_change > 1e-12;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    cur
}
