//! Procedural landmark layouts on an ellipsoidal head.
//!
//! Head frame: x toward image right, y toward the chin, the face looks down
//! −z. Layouts are exactly bilateral: every point with x < 0 has a partner
//! at (−x, y, z) and midline points have x = 0.

use std::f64::consts::PI;

use crate::camera::Point3;
use crate::rng::{keyed, Rng};

use super::{LandmarkTemplate3D, SemanticGroup};

const HEAD_AX: f64 = 1.1;
const HEAD_AY: f64 = 1.4;
const HEAD_AZ: f64 = 0.9;

/// Mirror partner of each point in the 68-point layout.
pub const FACE68_MIRROR: [usize; 68] = {
    let mut m = [0usize; 68];
    let mut i = 0;
    while i < 68 {
        m[i] = i;
        i += 1;
    }
    let pairs: [(usize, usize); 29] = [
        (0, 16), (1, 15), (2, 14), (3, 13), (4, 12), (5, 11), (6, 10), (7, 9),
        (17, 26), (18, 25), (19, 24), (20, 23), (21, 22),
        (31, 35), (32, 34),
        (36, 45), (37, 44), (38, 43), (39, 42), (40, 47), (41, 46),
        (48, 54), (49, 53), (50, 52), (55, 59), (56, 58),
        (60, 64), (61, 63), (65, 67),
    ];
    let mut k = 0;
    while k < pairs.len() {
        m[pairs[k].0] = pairs[k].1;
        m[pairs[k].1] = pairs[k].0;
        k += 1;
    }
    m
};

const FACE68_MIDLINE: [usize; 10] = [8, 27, 28, 29, 30, 33, 51, 57, 62, 66];

fn surface_z(x: f64, y: f64) -> f64 {
    let r = (x / HEAD_AX).powi(2) + (y / HEAD_AY).powi(2);
    -HEAD_AZ * (1.0 - r).max(0.05).sqrt()
}

fn ellipse(cx: f64, cy: f64, a: f64, b: f64, phi: f64) -> (f64, f64) {
    // phi measured counter-clockwise in image terms, so "up" is −y
    (cx + a * phi.cos(), cy - b * phi.sin())
}

/// Left half and midline of the 68-point layout as (x, y, extra depth).
fn face68_half() -> Vec<(usize, f64, f64, f64)> {
    let mut out = Vec::with_capacity(40);
    for i in 0..=8 {
        let th = PI * i as f64 / 16.0;
        let x = if i == 8 { 0.0 } else { -0.95 * th.cos() };
        out.push((i, x, -0.3 + 1.25 * th.sin(), 0.0));
    }
    for (j, i) in (17..=21).enumerate() {
        let s = j as f64 / 4.0;
        let x = -0.75 + 0.63 * s;
        out.push((i, x, -0.6 - 0.08 * (PI * s).sin(), -0.04));
    }
    for (j, i) in (27..=30).enumerate() {
        let s = j as f64 / 3.0;
        out.push((i, 0.0, -0.4 + 0.45 * s, -0.1 - 0.24 * s));
    }
    out.push((31, -0.18, 0.15, -0.1));
    out.push((32, -0.09, 0.18, -0.13));
    out.push((33, 0.0, 0.2, -0.16));
    let eye = [(36, PI), (37, 2.0 * PI / 3.0), (38, PI / 3.0), (39, 0.0), (40, -PI / 3.0), (41, -2.0 * PI / 3.0)];
    for (i, phi) in eye {
        let (x, y) = ellipse(-0.42, -0.35, 0.16, 0.07, phi);
        out.push((i, x, y, 0.02));
    }
    let outer = [
        (48, PI), (49, 5.0 * PI / 6.0), (50, 4.0 * PI / 6.0), (51, PI / 2.0),
        (57, -PI / 2.0), (58, -4.0 * PI / 6.0), (59, -5.0 * PI / 6.0),
    ];
    for (i, phi) in outer {
        let (x, y) = ellipse(0.0, 0.48, 0.38, 0.16, phi);
        out.push((i, if i == 51 || i == 57 { 0.0 } else { x }, y, -0.05));
    }
    let inner = [(60, PI), (61, 3.0 * PI / 4.0), (62, PI / 2.0), (66, -PI / 2.0), (67, -3.0 * PI / 4.0)];
    for (i, phi) in inner {
        let (x, y) = ellipse(0.0, 0.48, 0.28, 0.06, phi);
        out.push((i, if i == 62 || i == 66 { 0.0 } else { x }, y, -0.03));
    }
    out
}

fn face68_group(i: usize) -> SemanticGroup {
    match i {
        0..=16 => SemanticGroup::Contour,
        17..=26 => SemanticGroup::Brow,
        27..=35 => SemanticGroup::Nose,
        36..=47 => SemanticGroup::Eye,
        _ => SemanticGroup::Lips,
    }
}

/// Connectivity of the 68-point layout: jaw, brow and nose chains, closed
/// eye and lip loops.
pub fn face68_edges() -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    let chain = |e: &mut Vec<(usize, usize)>, a: usize, b: usize, closed: bool| {
        for i in a..b {
            e.push((i, i + 1));
        }
        if closed {
            e.push((b, a));
        }
    };
    chain(&mut e, 0, 16, false);
    chain(&mut e, 17, 21, false);
    chain(&mut e, 22, 26, false);
    chain(&mut e, 27, 30, false);
    chain(&mut e, 31, 35, false);
    chain(&mut e, 36, 41, true);
    chain(&mut e, 42, 47, true);
    chain(&mut e, 48, 59, true);
    chain(&mut e, 60, 67, true);
    e
}

fn jitter_factor(rng: &mut impl Rng, jitter: f64) -> f64 {
    if jitter > 0.0 {
        1.0 + rng.random_range(-jitter..=jitter)
    } else {
        1.0
    }
}

/// The 68-point face layout. `jitter` is the relative per-coordinate
/// perturbation drawn from the seeded stream; it is applied to one half and
/// mirrored, so symmetry survives.
pub fn face68(seed: u64, jitter: f64) -> LandmarkTemplate3D {
    let mut rng = keyed(seed, "make_head", 68);
    let mut pts = [Point3::origin(); 68];
    for (i, x, y, dz) in face68_half() {
        let (fx, fy, fz) = (
            jitter_factor(&mut rng, jitter),
            jitter_factor(&mut rng, jitter),
            jitter_factor(&mut rng, jitter),
        );
        let (x, y) = (x * fx, y * fy);
        let x = if FACE68_MIDLINE.contains(&i) { 0.0 } else { x };
        let z = (surface_z(x, y) + dz) * fz;
        pts[i] = Point3::new(x, y, z);
        let j = FACE68_MIRROR[i];
        if j != i {
            pts[j] = Point3::new(-x, y, z);
        }
    }
    let groups = (0..68).map(face68_group).collect();
    LandmarkTemplate3D::new(pts.to_vec(), (0..68).collect(), groups)
        .and_then(|t| t.with_edges(face68_edges()))
        .expect("built-in layout satisfies template invariants")
}

/// Symmetric layout with `m` points. `m = 68` uses the face layout; other
/// counts spread mirrored pairs over the front of the head on a golden-ratio
/// lattice, with one midline point when `m` is odd.
pub fn procedural(m: usize, seed: u64, jitter: f64) -> crate::Result<LandmarkTemplate3D> {
    if m == 68 {
        return Ok(face68(seed, jitter));
    }
    if m < super::MIN_LANDMARKS {
        return Err(crate::Error::CountMismatch {
            expected: super::MIN_LANDMARKS,
            found: m,
        });
    }
    let mut rng = keyed(seed, "make_head", m as u64);
    let pairs = m / 2;
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let mut pts = Vec::with_capacity(m);
    for i in 0..pairs {
        let t = (i as f64 + 0.5) / pairs as f64;
        let y = (-0.9 + 1.8 * t) * jitter_factor(&mut rng, jitter);
        let w = (1.0 - 0.8 * (y / HEAD_AY).powi(2)).sqrt();
        let frac = ((i + 1) as f64 * golden).fract();
        let x = -(0.05 + 0.85 * frac) * w * jitter_factor(&mut rng, jitter);
        let z = surface_z(x, y) * jitter_factor(&mut rng, jitter);
        pts.push(Point3::new(x, y, z));
        pts.push(Point3::new(-x, y, z));
    }
    if m % 2 == 1 {
        pts.push(Point3::new(0.0, 0.1, surface_z(0.0, 0.1) - 0.3));
    }
    LandmarkTemplate3D::new(pts, (0..m as u32).collect(), vec![SemanticGroup::Other; m])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirror_table_is_involution() {
        for i in 0..68 {
            assert_eq!(FACE68_MIRROR[FACE68_MIRROR[i]], i);
        }
        for &i in &FACE68_MIDLINE {
            assert_eq!(FACE68_MIRROR[i], i);
        }
        let fixed = (0..68).filter(|&i| FACE68_MIRROR[i] == i).count();
        assert_eq!(fixed, FACE68_MIDLINE.len());
    }

    #[test]
    fn half_layout_covers_left_and_midline() {
        let half = face68_half();
        let mut seen = [false; 68];
        for (i, x, _, _) in &half {
            assert!(!seen[*i]);
            seen[*i] = true;
            if FACE68_MIDLINE.contains(i) {
                assert_eq!(*x, 0.0);
            } else {
                assert!(*x < 0.0, "point {i} at x = {x}");
            }
        }
        for i in 0..68 {
            assert!(seen[i] || seen[FACE68_MIRROR[i]], "point {i} unassigned");
        }
    }

    #[test]
    fn face68_is_exactly_mirrored_at_any_jitter() {
        for (seed, jitter) in [(0, 0.0), (3, 0.05), (11, 0.05)] {
            let t = face68(seed, jitter);
            let p = t.points();
            for i in 0..68 {
                let j = FACE68_MIRROR[i];
                assert!((p[i].x + p[j].x).abs() < 1e-9);
                assert!((p[i].y - p[j].y).abs() < 1e-12);
                assert!((p[i].z - p[j].z).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn face_points_toward_negative_z() {
        let t = face68(0, 0.0);
        let nose = t.points()[30];
        let jaw = t.points()[0];
        assert!(nose.z < jaw.z);
        // chin below the brows
        assert!(t.points()[8].y > t.points()[19].y);
    }

    #[test]
    fn generic_counts_pass_invariants() {
        for m in [7, 8, 33, 468] {
            let t = procedural(m, 5, 0.05).unwrap();
            assert_eq!(t.len(), m);
        }
        assert!(procedural(6, 0, 0.0).is_err());
    }

    #[test]
    fn edges_reference_valid_points() {
        let e = face68_edges();
        assert!(e.iter().all(|&(a, b)| a < 68 && b < 68 && a != b));
        assert_eq!(e.len(), 16 + 4 + 4 + 3 + 4 + 6 + 6 + 12 + 8);
    }
}
