use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use proptest::prelude::*;

use image::{Rgb, RgbImage};
use lmcam::camera::{project, scale_scene, world_to_camera, Intrinsics, Pixel2, Point3, Pose, Rotation};
use lmcam::datagen::{
    multishot_stitch, synthetic_pan, synthetic_zoom, zoom_schedule, FrameSequence, PanParams, ZoomParams,
};
use lmcam::epipolar::{
    algebraic_residual, cheirality_select, decompose_essential, essential_from_fundamental,
    estimate_fundamental_8pt, pnp_solve, ransac_fundamental, Correspondence, FundamentalMatrix, RansacConfig,
    RelativePose,
};
use lmcam::eval::{head_pose_delta, psnr_frame, ssim_frame};
use lmcam::landmarks::{layout, project_landmarks, project_points, rasterize, LandmarkFrame2D, RasterStyle};
use lmcam::oracle::{make_head, make_rig};
use lmcam::trajectory::{sample, CameraKeyframe, CanonicalMotion, MotionKind, Trajectory};

fn rotation() -> impl Strategy<Value = Rotation> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("non-degenerate quaternion", |q| q.0 * q.0 + q.1 * q.1 + q.2 * q.2 + q.3 * q.3 > 1e-3)
        .prop_map(|(w, x, y, z)| Rotation::from_quaternion(&UnitQuaternion::from_quaternion(Quaternion::new(w, x, y, z))))
}

/// Object pose keeping a unit-RMS cloud in front of the camera.
fn pose() -> impl Strategy<Value = Pose> {
    (rotation(), -1.0..1.0f64, -1.0..1.0f64, 4.0..12.0f64)
        .prop_map(|(r, x, y, z)| Pose::new(r, Vector3::new(x, y, z)).unwrap())
}

fn intrinsics() -> impl Strategy<Value = Intrinsics> {
    (25.0..80.0f64).prop_map(|fov| Intrinsics::from_fov(fov, 160, 128).unwrap())
}

fn log_alpha() -> impl Strategy<Value = f64> {
    (-3.0..3.0f64).prop_map(|e| 10f64.powf(e))
}

fn pose_close(a: &Pose, b: &Pose, tol: f64) -> bool {
    (a.rotation.matrix() - b.rotation.matrix()).amax() < tol && (a.translation - b.translation).amax() < tol
}

fn frame(w: u32, h: u32, seed: u32) -> RgbImage {
    RgbImage::from_fn(w, h, |x, y| {
        let v = x.wrapping_mul(73_856_093) ^ y.wrapping_mul(19_349_663) ^ seed.wrapping_mul(83_492_791);
        Rgb([(v % 256) as u8, ((v >> 8) % 256) as u8, ((v >> 16) % 256) as u8])
    })
}

fn clip(n: usize, w: u32, h: u32, seed: u32) -> FrameSequence {
    FrameSequence::new((0..n as u32).map(|i| frame(w, h, seed * 131 + i)).collect(), 24.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_scale_invariant(seed in 0u64..1000, m in 7usize..120, p in pose(), k in intrinsics(), alpha in log_alpha()) {
        let t = layout::procedural(m, seed, 0.05).unwrap();
        let (sp, spose) = scale_scene(t.points(), &p, alpha).unwrap();
        let a = project_points(t.points(), &p, &k).unwrap();
        let b = project_points(&sp, &spose, &k).unwrap();
        for (u, v) in a.points.iter().zip(&b.points) {
            prop_assert!((u - v).norm() <= 1e-9);
        }
        let style = RasterStyle::for_template(&t);
        prop_assert_eq!(rasterize(&a, &style, k.width, k.height), rasterize(&b, &style, k.width, k.height));
    }

    #[test]
    fn composed_pose_matches_sequential(a in pose(), b in pose(), x in -3.0..3.0f64, y in -3.0..3.0f64, z in -3.0..3.0f64) {
        let p = Point3::new(x, y, z);
        let once = world_to_camera(&a.compose(&b), &p);
        let twice = world_to_camera(&a, &world_to_camera(&b, &p));
        prop_assert!((once - twice).amax() < 1e-12 * (1.0 + twice.coords.amax()));
    }

    #[test]
    fn projection_is_homogeneous(k in intrinsics(), x in -2.0..2.0f64, y in -2.0..2.0f64, z in 0.1..10.0f64, lambda in log_alpha()) {
        let p = Point3::new(x, y, z);
        let a = project(&k, &p).unwrap();
        let b = project(&k, &Point3::from(p.coords * lambda)).unwrap();
        prop_assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn oracle_pairs_satisfy_epipolar_constraint(seed in 0u64..500, i in 0usize..16, step in 1usize..16, elev in -25.0..25.0f64) {
        let head = make_head(seed, 68).unwrap();
        let k = Intrinsics::from_fov(40.0, 512, 512).unwrap();
        let rig = make_rig(16, 6.0, elev, k).unwrap();
        let (a, b) = (&rig.cameras[i], &rig.cameras[(i + step) % 16]);
        let pa = project_landmarks(&head.template, &a.pose, &k).unwrap();
        let pb = project_landmarks(&head.template, &b.pose, &k).unwrap();
        let corrs: Vec<Correspondence> = pa.points.iter().zip(&pb.points).map(|(p, q)| Correspondence::new(*p, *q)).collect();
        let f = FundamentalMatrix::from_poses(&a.pose, &b.pose, &k, &k).unwrap();
        for c in &corrs {
            prop_assert!(algebraic_residual(&f, c) < 1e-10);
        }
        let fit = estimate_fundamental_8pt(&corrs).unwrap();
        let e = essential_from_fundamental(&fit, &k, &k);
        let rel = cheirality_select(&decompose_essential(&e), &corrs, &k, &k).unwrap();
        let truth = RelativePose::between(&a.pose, &b.pose).unwrap();
        prop_assert!(rel.translation_dir.dot(&truth.translation_dir) > 1.0 - 1e-8);
        prop_assert!((rel.translation_dir.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pnp_is_scale_covariant(seed in 0u64..500, p in pose(), k in intrinsics(), alpha in log_alpha()) {
        let head = make_head(seed, 68).unwrap();
        let pts = head.template.points();
        let px = project_points(pts, &p, &k).unwrap().points;
        let est = pnp_solve(pts, &px, &k).unwrap();
        let (sp, spose) = scale_scene(pts, &p, alpha).unwrap();
        let spx = project_points(&sp, &spose, &k).unwrap().points;
        for (u, v) in px.iter().zip(&spx) {
            prop_assert!((u - v).norm() < 1e-9);
        }
        let s = pnp_solve(&sp, &spx, &k).unwrap();
        prop_assert!(s.rotation.angle_to(&est.rotation) < 1e-8);
        let want = est.translation * alpha;
        prop_assert!((s.translation - want).norm() <= 1e-8 * want.norm());
    }

    #[test]
    fn ransac_inliers_grow_with_threshold(seed in 0u64..200, lo in 0.2..2.0f64, factor in 1.0..8.0f64) {
        let head = make_head(seed, 68).unwrap();
        let k = Intrinsics::from_fov(40.0, 512, 512).unwrap();
        let rig = make_rig(16, 6.0, 10.0, k).unwrap();
        let (a, b) = (&rig.cameras[(seed % 16) as usize], &rig.cameras[((seed + 3) % 16) as usize]);
        let pa = project_landmarks(&head.template, &a.pose, &k).unwrap();
        let pb = project_landmarks(&head.template, &b.pose, &k).unwrap();
        let corrs: Vec<Correspondence> = pa
            .points
            .iter()
            .zip(&pb.points)
            .enumerate()
            .map(|(i, (p, q))| {
                let q = if i % 4 == 0 { Pixel2::new((i * 37 % 512) as f64, (i * 91 % 512) as f64) } else { *q };
                Correspondence::new(*p, q)
            })
            .collect();
        let run = |thr: f64| {
            ransac_fundamental(&corrs, &RansacConfig { threshold_px: thr, seed, ..Default::default() })
                .map(|o| o.inlier_count())
                .unwrap_or(0)
        };
        prop_assert!(run(lo * factor) >= run(lo));
    }

    #[test]
    fn raster_changes_stay_local(seed in 0u64..200, idx in 0usize..68, dx in -12.0..12.0f64, dy in -12.0..12.0f64) {
        let t = layout::face68(seed, 0.05);
        let k = Intrinsics::from_fov(40.0, 160, 160).unwrap();
        let kf = CameraKeyframe::orbit(0.0, 0.0, 6.0, 40.0, 0.0).unwrap();
        let a = project_landmarks(&t, &kf.pose, &k).unwrap();
        let mut b: LandmarkFrame2D = a.clone();
        b.points[idx] = Pixel2::new(a.points[idx].x + dx, a.points[idx].y + dy);
        let style = RasterStyle::for_template(&t);
        let (ma, mb) = (rasterize(&a, &style, 160, 160), rasterize(&b, &style, 160, 160));
        let margin = style.point_radius_px + style.line_width_px + 1.0;
        let segs: Vec<(usize, usize)> = t.edges().iter().copied().filter(|&(u, v)| u == idx || v == idx).collect();
        let near = |x: f64, y: f64, f: &LandmarkFrame2D| {
            let p = Pixel2::new(x, y);
            if (p - f.points[idx]).norm() <= margin {
                return true;
            }
            segs.iter().any(|&(u, v)| {
                let (s, e) = (f.points[u], f.points[v]);
                let d = e - s;
                let l2 = d.norm_squared();
                let tt = if l2 > 0.0 { ((p - s).dot(&d) / l2).clamp(0.0, 1.0) } else { 0.0 };
                (s + d * tt - p).norm() <= margin
            })
        };
        for y in 0..160 {
            for x in 0..160 {
                if ma.pixel(x, y) != mb.pixel(x, y) {
                    let (fx, fy) = (x as f64, y as f64);
                    prop_assert!(near(fx, fy, &a) || near(fx, fy, &b), "pixel ({x},{y}) changed");
                }
            }
        }
    }

    #[test]
    fn arcs_keep_orbit_distance(az in -180.0..180.0f64, el in -40.0..40.0f64, dist in 2.0..20.0f64, mag in 1.0..90.0f64, which in 0usize..4, frames in 2usize..60) {
        let kind = [MotionKind::ArcLeft, MotionKind::ArcRight, MotionKind::ArcUp, MotionKind::ArcDown][which];
        let base = CameraKeyframe::orbit(az, el, dist, 40.0, 0.0).unwrap();
        let traj = lmcam::trajectory::canonical_trajectory(&CanonicalMotion::new(kind, mag).unwrap(), &base, 64, 64, frames).unwrap();
        for cam in sample(&traj, frames).unwrap() {
            prop_assert!((cam.pose.center().coords.norm() - dist).abs() <= 1e-9 * dist);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_time_symmetric(a in pose(), b in pose(), fov_a in 20.0..90.0f64, fov_b in 20.0..90.0f64, frames in 1usize..50) {
        let traj = Trajectory::new(
            vec![CameraKeyframe::new(a, fov_a, 0.0).unwrap(), CameraKeyframe::new(b, fov_b, 1.0).unwrap()],
            96,
            64,
        )
        .unwrap();
        let s = sample(&traj, frames).unwrap();
        prop_assert_eq!(&s, &sample(&traj, frames).unwrap());
        prop_assert!(s.windows(2).all(|w| w[1].time > w[0].time));
        if frames > 1 {
            let r = sample(&traj.reversed(), frames).unwrap();
            for (x, y) in s.iter().zip(r.iter().rev()) {
                prop_assert!(pose_close(&x.pose, &y.pose, 1e-12));
                prop_assert!((x.fov_deg - y.fov_deg).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn datagen_is_deterministic_and_keeps_dimensions(seed in any::<u64>(), w in 8u32..40, h in 8u32..40, n in 1usize..5) {
        let c = clip(n, w, h, (seed % 1000) as u32);
        let z1 = synthetic_zoom(&c, ZoomParams::Seeded(seed), [0; 3]).unwrap();
        let z2 = synthetic_zoom(&c, ZoomParams::Seeded(seed), [0; 3]).unwrap();
        prop_assert_eq!(z1.0.frames(), z2.0.frames());
        prop_assert!(z1.0.frames().iter().all(|f| f.dimensions() == (w, h)));
        let p1 = synthetic_pan(&c, PanParams::Seeded(seed), None, [0; 3]).unwrap();
        let p2 = synthetic_pan(&c, PanParams::Seeded(seed), None, [0; 3]).unwrap();
        prop_assert_eq!(p1.0.frames(), p2.0.frames());
        prop_assert!(p1.0.frames().iter().all(|f| f.dimensions() == (w, h)));
        let clips: Vec<_> = (0..4).map(|i| clip(3 + i, w, h, i as u32)).collect();
        let s1 = multishot_stitch(&clips, seed, 4).unwrap();
        let s2 = multishot_stitch(&clips, seed, 4).unwrap();
        prop_assert_eq!(s1.sequence.frames(), s2.sequence.frames());
    }

    #[test]
    fn zoom_schedule_is_monotone(t in 2usize..200, s0 in 0.5..1.5f64, gap in 1e-6..1.0f64) {
        let s = zoom_schedule(t, s0, s0 + gap);
        prop_assert_eq!(s.len(), t);
        prop_assert!(s.windows(2).all(|w| w[1] > w[0]));
        prop_assert_eq!(s[0], s0);
        prop_assert!((s[t - 1] - (s0 + gap)).abs() < 1e-15);
    }

    #[test]
    fn metrics_are_symmetric(w in 11u32..40, h in 11u32..40, sa in any::<u32>(), sb in any::<u32>()) {
        let (a, b) = (frame(w, h, sa), frame(w, h, sb));
        prop_assert_eq!(psnr_frame(&a, &b).unwrap().to_bits(), psnr_frame(&b, &a).unwrap().to_bits());
        prop_assert!((ssim_frame(&a, &b).unwrap() - ssim_frame(&b, &a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn head_pose_delta_ignores_scene_scale(seed in 0u64..200, which in 0usize..10, alpha in log_alpha()) {
        let head = make_head(seed, 68).unwrap();
        let t = &head.template;
        let k = Intrinsics::from_fov(40.0, 256, 256).unwrap();
        let base = CameraKeyframe::orbit(0.0, 0.0, 6.0, 40.0, 0.0).unwrap();
        let m = CanonicalMotion::with_default_magnitude(MotionKind::ALL[which]);
        let end = m.apply(&base.pose, 40.0, 256, 256).unwrap();
        let frames = |alpha: f64| {
            [base.pose, end].map(|p| {
                let (sp, spose) = scale_scene(t.points(), &p, alpha).unwrap();
                project_points(&sp, &spose, &k).unwrap()
            })
        };
        let [a0, a1] = frames(1.0);
        let [b0, b1] = frames(alpha);
        let d = head_pose_delta(&a0, &a1, t, &k).unwrap();
        let e = head_pose_delta(&b0, &b1, t, &k).unwrap();
        for (x, y) in [(d.yaw_deg, e.yaw_deg), (d.pitch_deg, e.pitch_deg), (d.roll_deg, e.roll_deg), (d.du_px, e.du_px), (d.dv_px, e.dv_px), (d.scale_ratio, e.scale_ratio)] {
            prop_assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
        let scaled: Vec<Point3> = t.points().iter().map(|p| Point3::from(p.coords * alpha)).collect();
        let renormalized = lmcam::landmarks::LandmarkTemplate3D::new(scaled, t.ids().to_vec(), t.groups().to_vec()).unwrap();
        let f = head_pose_delta(&a0, &a1, &renormalized, &k).unwrap();
        prop_assert!((f.yaw_deg - d.yaw_deg).abs() < 1e-6 && (f.du_px - d.du_px).abs() < 1e-9);
    }
}
