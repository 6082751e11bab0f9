use nalgebra::{DMatrix, Matrix3, Point2, Vector3};

use super::{descending_order, Correspondence, FundamentalMatrix};
use crate::error::{Error, Result};

/// Ratio `σ_min / σ_max` below which the design matrix counts as
/// rank deficient.
const CONDITION_LIMIT: f64 = 1e-12;

/// Hartley isotropic normalization: centroid to the origin, mean distance √2.
fn hartley(points: impl Iterator<Item = Point2<f64>> + Clone) -> Result<(Vec<Point2<f64>>, Matrix3<f64>)> {
    let n = points.clone().count() as f64;
    let centroid = points.clone().fold(Vector3::zeros(), |acc, p| acc + p.coords.push(0.0)) / n;
    let (cx, cy) = (centroid.x, centroid.y);
    let mean_dist = points
        .clone()
        .map(|p| ((p.x - cx).powi(2) + (p.y - cy).powi(2)).sqrt())
        .sum::<f64>()
        / n;
    if !(mean_dist > 1e-300 && mean_dist.is_finite()) {
        return Err(Error::Degenerate("all points coincide".into()));
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    let t = Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0);
    let out = points
        .map(|p| Point2::new(s * (p.x - cx), s * (p.y - cy)))
        .collect();
    Ok((out, t))
}

fn normalized_pairs(corrs: &[Correspondence]) -> Result<(Vec<Point2<f64>>, Vec<Point2<f64>>, Matrix3<f64>, Matrix3<f64>)> {
    if corrs.iter().any(|c| !(c.p1.iter().chain(c.p2.iter()).all(|v| v.is_finite()))) {
        return Err(Error::Degenerate("non-finite correspondence".into()));
    }
    let (n1, t1) = hartley(corrs.iter().map(|c| c.p1))?;
    let (n2, t2) = hartley(corrs.iter().map(|c| c.p2))?;
    Ok((n1, n2, t1, t2))
}

/// SVD of the epipolar design matrix (`p₂ᵀ F p₁ = 0`, F row-major), padded
/// with zero rows to at least 9 so the full right singular basis is
/// available. Returns `(singular values descending, matching vectors)`.
fn design_svd(n1: &[Point2<f64>], n2: &[Point2<f64>]) -> Result<(Vec<f64>, Vec<[f64; 9]>)> {
    let rows = n1.len().max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (i, (p, q)) in n1.iter().zip(n2).enumerate() {
        let row = [
            q.x * p.x,
            q.x * p.y,
            q.x,
            q.y * p.x,
            q.y * p.y,
            q.y,
            p.x,
            p.y,
            1.0,
        ];
        for (j, v) in row.iter().enumerate() {
            a[(i, j)] = *v;
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Degenerate("SVD did not converge".into()))?;
    let order = descending_order(&svd.singular_values);
    let sv = order.iter().map(|&i| svd.singular_values[i]).collect();
    let vecs = order
        .iter()
        .map(|&i| {
            let mut v = [0.0; 9];
            for (j, e) in v.iter_mut().enumerate() {
                *e = v_t[(i, j)];
            }
            v
        })
        .collect();
    Ok((sv, vecs))
}

fn mat_from(v: &[f64; 9]) -> Matrix3<f64> {
    Matrix3::from_row_slice(v)
}

fn finish(f_norm: &Matrix3<f64>, t1: &Matrix3<f64>, t2: &Matrix3<f64>) -> Result<FundamentalMatrix> {
    let rank2 = FundamentalMatrix::from_matrix(f_norm)
        .ok_or_else(|| Error::Degenerate("rank-2 projection failed".into()))?;
    let f = t2.transpose() * rank2.0 * t1;
    FundamentalMatrix::from_matrix(&f)
        .ok_or_else(|| Error::Degenerate("denormalized F vanished".into()))
}

/// Normalized eight-point estimate from `≥ 8` correspondences.
pub fn estimate_fundamental_8pt(corrs: &[Correspondence]) -> Result<FundamentalMatrix> {
    if corrs.len() < 8 {
        return Err(Error::InsufficientPoints {
            needed: 8,
            got: corrs.len(),
        });
    }
    let (n1, n2, t1, t2) = normalized_pairs(corrs)?;
    let (sv, vecs) = design_svd(&n1, &n2)?;
    if sv[7] < CONDITION_LIMIT * sv[0] {
        return Err(Error::Degenerate(format!(
            "design matrix rank deficient (σ₈/σ₁ = {:e})",
            sv[7] / sv[0]
        )));
    }
    finish(&mat_from(&vecs[8]), &t1, &t2)
}

/// Seven-point minimal solver: one to three candidate matrices.
pub fn estimate_fundamental_7pt(corrs: &[Correspondence]) -> Result<Vec<FundamentalMatrix>> {
    if corrs.len() != 7 {
        return Err(Error::CountMismatch {
            expected: 7,
            found: corrs.len(),
        });
    }
    let (n1, n2, t1, t2) = normalized_pairs(corrs)?;
    let (sv, vecs) = design_svd(&n1, &n2)?;
    if sv[6] < CONDITION_LIMIT * sv[0] {
        return Err(Error::Degenerate(format!(
            "design matrix rank deficient (σ₇/σ₁ = {:e})",
            sv[6] / sv[0]
        )));
    }
    let f1 = mat_from(&vecs[7]);
    let f2 = mat_from(&vecs[8]);
    // det(a·F1 + (1-a)·F2) is a cubic in a; recover its coefficients from
    // four exact evaluations.
    let det_at = |a: f64| (f1 * a + f2 * (1.0 - a)).determinant();
    let p0 = det_at(0.0);
    let p1 = det_at(1.0);
    let pm1 = det_at(-1.0);
    let p2 = det_at(2.0);
    let d = p0;
    let b = 0.5 * (p1 + pm1) - d;
    let a_plus_c = 0.5 * (p1 - pm1);
    let a = (p2 - 4.0 * b - d - 2.0 * a_plus_c) / 6.0;
    let c = a_plus_c - a;

    let mut candidates: Vec<Matrix3<f64>> = Vec::new();
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    if a.abs() <= 1e-12 * scale {
        // root at infinity: F1 - F2 is singular
        candidates.push(f1 - f2);
    }
    for root in real_cubic_roots(a, b, c, d) {
        candidates.push(f1 * root + f2 * (1.0 - root));
    }
    let mut out = Vec::with_capacity(candidates.len());
    for m in candidates {
        if let Ok(f) = finish(&m, &t1, &t2) {
            if !out
                .iter()
                .any(|g: &FundamentalMatrix| (g.0 - f.0).norm() < 1e-10 || (g.0 + f.0).norm() < 1e-10)
            {
                out.push(f);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Degenerate("no real solution".into()));
    }
    Ok(out)
}

/// Distinct real roots of `a x³ + b x² + c x + d`, polished by Newton steps.
/// Falls back to lower degree when leading coefficients vanish.
pub(crate) fn real_cubic_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    let mut roots = if a.abs() <= 1e-12 * scale {
        real_quadratic_roots(b, c, d, scale)
    } else {
        let (b, c, d) = (b / a, c / a, d / a);
        // depressed cubic y³ + p y + q, x = y - b/3
        let shift = b / 3.0;
        let p = c - b * b / 3.0;
        let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
        let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
        if disc > 0.0 {
            let sq = disc.sqrt();
            let u = (-q / 2.0 + sq).cbrt();
            let v = (-q / 2.0 - sq).cbrt();
            vec![u + v - shift]
        } else if p == 0.0 {
            vec![-shift]
        } else {
            let r = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
            let phi = arg.acos() / 3.0;
            (0..3)
                .map(|k| r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
                .collect()
        }
    };
    for x in roots.iter_mut() {
        for _ in 0..3 {
            let f = ((a * *x + b) * *x + c) * *x + d;
            let df = (3.0 * a * *x + 2.0 * b) * *x + c;
            if df.abs() > 0.0 {
                let step = f / df;
                if step.is_finite() {
                    *x -= step;
                }
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + x.abs()));
    roots
}

fn real_quadratic_roots(a: f64, b: f64, c: f64, scale: f64) -> Vec<f64> {
    if a.abs() <= 1e-12 * scale {
        if b.abs() <= 1e-12 * scale {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// First-order geometric (Sampson) distance in pixels.
pub fn sampson_distance(f: &FundamentalMatrix, c: &Correspondence) -> f64 {
    let x1 = Vector3::new(c.p1.x, c.p1.y, 1.0);
    let x2 = Vector3::new(c.p2.x, c.p2.y, 1.0);
    let fx1 = f.0 * x1;
    let ftx2 = f.0.transpose() * x2;
    let num = x2.dot(&fx1);
    let den = fx1.x * fx1.x + fx1.y * fx1.y + ftx2.x * ftx2.x + ftx2.y * ftx2.y;
    if den <= 0.0 {
        return f64::INFINITY;
    }
    (num * num / den).sqrt()
}

/// Scale-free algebraic residual `|p₂ᵀFp₁| / (‖F‖·‖p₁‖·‖p₂‖)`.
pub fn algebraic_residual(f: &FundamentalMatrix, c: &Correspondence) -> f64 {
    let x1 = Vector3::new(c.p1.x, c.p1.y, 1.0);
    let x2 = Vector3::new(c.p2.x, c.p2.y, 1.0);
    (x2.dot(&(f.0 * x1))).abs() / (f.0.norm() * x1.norm() * x2.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::{Intrinsics, Pixel2, Point3, Pose, Rotation};
    use crate::epipolar::{normalize_sign, skew};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn normalized_corrs(pose2: &Pose, pts: &[Point3]) -> Vec<Correspondence> {
        pts.iter()
            .map(|x| {
                let x2 = pose2.world_to_camera(x);
                Correspondence::new(
                    Pixel2::new(x.x / x.z, x.y / x.z),
                    Pixel2::new(x2.x / x2.z, x2.y / x2.z),
                )
            })
            .collect()
    }

    fn cloud(rng: &mut impl Rng, n: usize) -> Vec<Point3> {
        (0..n)
            .map(|_| {
                Point3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(3.0..5.0),
                )
            })
            .collect()
    }

    #[test]
    fn pure_translation_gives_skew_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pose2 = Pose::new(Rotation::identity(), Vector3::new(1.0, 0.0, 0.0)).unwrap();
        let corrs = normalized_corrs(&pose2, &cloud(&mut rng, 20));
        let f = estimate_fundamental_8pt(&corrs).unwrap();
        let expect = normalize_sign(skew(&Vector3::new(1.0, 0.0, 0.0))).unwrap();
        let err = (f.matrix() - expect).norm().min((f.matrix() + expect).norm());
        assert!(err < 1e-9, "err {err}");
    }

    #[test]
    fn eight_point_noise_free_pixels() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let k = Intrinsics::new(800.0, 800.0, 320.0, 240.0, 640, 480).unwrap();
        let pose2 = Pose::new(
            Rotation::from_axis_angle(&Vector3::new(0.1, 1.0, 0.2), 0.3),
            Vector3::new(-0.8, 0.1, 0.2),
        )
        .unwrap();
        let corrs: Vec<_> = cloud(&mut rng, 100)
            .iter()
            .map(|x| {
                let p1 = crate::camera::project(&k, x).unwrap();
                let p2 = crate::camera::project(&k, &pose2.world_to_camera(x)).unwrap();
                Correspondence::new(p1, p2)
            })
            .collect();
        let f = estimate_fundamental_8pt(&corrs).unwrap();
        let max_alg = corrs.iter().map(|c| algebraic_residual(&f, c)).fold(0.0, f64::max);
        let max_samp = corrs.iter().map(|c| sampson_distance(&f, c)).fold(0.0, f64::max);
        assert!(max_alg < 1e-10, "algebraic {max_alg:e}");
        assert!(max_samp < 1e-8, "sampson {max_samp:e}");
    }

    #[test]
    fn too_few_points() {
        let c = Correspondence::new(Pixel2::new(0.0, 0.0), Pixel2::new(1.0, 1.0));
        assert!(matches!(
            estimate_fundamental_8pt(&[c; 7]),
            Err(Error::InsufficientPoints { needed: 8, got: 7 })
        ));
    }

    #[test]
    fn duplicated_points_are_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pose2 = Pose::new(Rotation::identity(), Vector3::new(1.0, 0.2, 0.0)).unwrap();
        let mut corrs = normalized_corrs(&pose2, &cloud(&mut rng, 7));
        corrs[6] = corrs[2];
        assert!(matches!(estimate_fundamental_7pt(&corrs), Err(Error::Degenerate(_))));
        let mut c8 = normalized_corrs(&pose2, &cloud(&mut rng, 8));
        c8[7] = c8[0];
        assert!(matches!(estimate_fundamental_8pt(&c8), Err(Error::Degenerate(_))));
    }

    #[test]
    fn seven_point_recovers_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let pose2 = Pose::new(
                Rotation::from_axis_angle(
                    &Vector3::new(rng.random(), rng.random(), rng.random()),
                    rng.random_range(-0.5..0.5),
                ),
                Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.3),
            )
            .unwrap();
            let corrs = normalized_corrs(&pose2, &cloud(&mut rng, 7));
            let sols = estimate_fundamental_7pt(&corrs).unwrap();
            assert!((1..=3).contains(&sols.len()));
            let best = sols
                .iter()
                .map(|f| corrs.iter().map(|c| algebraic_residual(f, c)).fold(0.0, f64::max))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8, "best {best:e}");
        }
    }

    #[test]
    fn seven_point_requires_exactly_seven() {
        let c = Correspondence::new(Pixel2::new(0.0, 0.0), Pixel2::new(1.0, 1.0));
        assert!(estimate_fundamental_7pt(&[c; 8]).is_err());
    }

    #[test]
    fn cubic_roots_against_known_factors() {
        // (x-1)(x-2)(x+3) = x³ - 7x + 6
        let r = real_cubic_roots(1.0, 0.0, -7.0, 6.0);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        // x³ + x + 1 has one real root
        let r = real_cubic_roots(1.0, 0.0, 1.0, 1.0);
        assert_eq!(r.len(), 1);
        assert!((r[0].powi(3) + r[0] + 1.0).abs() < 1e-14);
        // degree drop
        assert_eq!(real_cubic_roots(0.0, 1.0, -3.0, 2.0), vec![1.0, 2.0]);
    }

    #[test]
    fn sampson_is_zero_on_epipolar_line_and_positive_off_it() {
        let f = FundamentalMatrix::from_matrix(&skew(&Vector3::new(1.0, 0.0, 0.0))).unwrap();
        // horizontal epipolar lines: same y is consistent
        let on = Correspondence::new(Pixel2::new(0.2, 0.3), Pixel2::new(-0.4, 0.3));
        let off = Correspondence::new(Pixel2::new(0.2, 0.3), Pixel2::new(-0.4, 0.5));
        assert!(sampson_distance(&f, &on) < 1e-15);
        assert!(sampson_distance(&f, &off) > 0.05);
    }
}
