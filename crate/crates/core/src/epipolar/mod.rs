//! Two-view geometry and pose recovery from correspondences.

mod essential;
mod fundamental;
mod pnp;
mod ransac;
mod triangulate;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::camera::{Pixel2, Pose, Rotation};

pub use essential::{cheirality_select, decompose_essential, essential_from_fundamental, refine_relative_pose};
pub use fundamental::{
    algebraic_residual, estimate_fundamental_7pt, estimate_fundamental_8pt, sampson_distance,
};
pub use pnp::{pnp_solve, pnp_solve_with, PnpOptions, PnpReport};
pub use ransac::{ransac_fundamental, RansacConfig, RansacOutcome};
pub use triangulate::triangulate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub p1: Pixel2,
    pub p2: Pixel2,
}

impl Correspondence {
    pub fn new(p1: Pixel2, p2: Pixel2) -> Self {
        Correspondence { p1, p2 }
    }
}

/// Rank-2 fundamental matrix with unit Frobenius norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalMatrix(Matrix3<f64>);

impl FundamentalMatrix {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Projects an arbitrary matrix to rank 2 and unit norm.
    pub fn from_matrix(m: &Matrix3<f64>) -> Option<Self> {
        let svd = m.svd(true, true);
        let (u, v_t) = (svd.u?, svd.v_t?);
        let s = svd.singular_values;
        let min = (0..3).min_by(|&a, &b| s[a].total_cmp(&s[b]))?;
        // deflate the smallest component; recomposing U·S·Vᵀ would smear
        // SVD round-off over the tiny entries of pixel-space matrices
        let f = m - u.column(min) * v_t.row(min) * s[min];
        normalize_sign(f).map(FundamentalMatrix)
    }

    /// True fundamental matrix of two calibrated views, `K₂⁻ᵀ [t]ₓ R K₁⁻¹`.
    pub fn from_poses(
        pose1: &Pose,
        pose2: &Pose,
        k1: &crate::camera::Intrinsics,
        k2: &crate::camera::Intrinsics,
    ) -> Option<Self> {
        let rel = RelativePose::between(pose1, pose2)?;
        let e = skew(&rel.translation_dir) * rel.rotation.matrix();
        let k1i = k1.matrix().try_inverse()?;
        let k2i = k2.matrix().try_inverse()?;
        Self::from_matrix(&(k2i.transpose() * e * k1i))
    }
}

/// Essential matrix with singular values `(1, 1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssentialMatrix(Matrix3<f64>);

impl EssentialMatrix {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Singular-value projection onto `(σ, σ, 0)` with `σ = 1`.
    pub fn project(m: &Matrix3<f64>) -> Option<Self> {
        let svd = m.svd(true, true);
        let (u, v_t) = (svd.u?, svd.v_t?);
        let s = svd.singular_values;
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
        if s[order[1]] <= 0.0 {
            return None;
        }
        let mut d = Vector3::zeros();
        d[order[0]] = 1.0;
        d[order[1]] = 1.0;
        Some(EssentialMatrix(u * Matrix3::from_diagonal(&d) * v_t))
    }
}

/// Relative motion from view 1 to view 2 (`x₂ = R x₁ + t`), translation is
/// a unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativePose {
    pub rotation: Rotation,
    pub translation_dir: Vector3<f64>,
}

impl RelativePose {
    /// `pose2 ∘ pose1⁻¹` with the translation normalized. `None` when the
    /// camera centers coincide.
    pub fn between(pose1: &Pose, pose2: &Pose) -> Option<Self> {
        let rel = pose2.compose(&pose1.inverse());
        let n = rel.translation.norm();
        if n < 1e-15 {
            return None;
        }
        Some(RelativePose {
            rotation: rel.rotation,
            translation_dir: rel.translation / n,
        })
    }

    pub fn as_pose(&self) -> Pose {
        Pose {
            rotation: self.rotation,
            translation: self.translation_dir,
        }
    }
}

pub(crate) fn skew(t: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -t.z, t.y, t.z, 0.0, -t.x, -t.y, t.x, 0.0)
}

/// Unit Frobenius norm, largest-magnitude entry positive.
pub(crate) fn normalize_sign(m: Matrix3<f64>) -> Option<Matrix3<f64>> {
    let n = m.norm();
    if !(n > 0.0 && n.is_finite()) {
        return None;
    }
    let mut m = m / n;
    let (mut best, mut val) = (0.0f64, 0.0f64);
    for v in m.iter() {
        if v.abs() > best {
            best = v.abs();
            val = *v;
        }
    }
    if val < 0.0 {
        m = -m;
    }
    Some(m)
}

/// Indices of singular values sorted descending.
pub(crate) fn descending_order(s: &nalgebra::DVector<f64>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    idx
}
