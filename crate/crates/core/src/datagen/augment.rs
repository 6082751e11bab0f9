use image::{GrayImage, Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use super::ops::{center_crop_or_pad, resize_by, resize_nearest};
use super::{FrameSequence, MaskSequence, Provenance, AUGMENT_SCALE_RANGE};
use crate::error::Result;
use crate::rng::{keyed, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    /// Center crop/pad each output back to its input size; padding is
    /// background.
    pub restore_size: bool,
}

#[derive(Debug, Clone)]
pub struct AugmentOutput {
    pub source: FrameSequence,
    pub target: FrameSequence,
    pub provenance: Provenance,
}

fn composite(frame: &RgbImage, mask: &GrayImage, s: f64, c: [u8; 3], restore: bool) -> Result<RgbImage> {
    let j = resize_by(frame, s)?;
    let m = resize_nearest(mask, j.width(), j.height())?;
    let mut out = RgbImage::from_fn(j.width(), j.height(), |x, y| {
        if m.get_pixel(x, y)[0] == 1 {
            *j.get_pixel(x, y)
        } else {
            Rgb(c)
        }
    });
    if restore {
        out = center_crop_or_pad(&out, frame.width(), frame.height(), Rgb(c))?;
    }
    Ok(out)
}

fn augment_clip(seq: &FrameSequence, masks: &MaskSequence, s: f64, c: [u8; 3], restore: bool) -> Result<FrameSequence> {
    let frames = seq
        .frames()
        .iter()
        .zip(masks.masks())
        .map(|(f, m)| composite(f, m, s, c, restore))
        .collect::<Result<Vec<_>>>()?;
    FrameSequence::new(frames, seq.fps)
}

/// Rescales each clip by its own factor from `U(0.75, 1.25)` and replaces
/// the unmasked region with one background color shared by both clips:
/// `Ĩ = M⊙J + c·(1 − M)`.
pub fn scale_color_augment(
    source: &FrameSequence,
    target: &FrameSequence,
    src_masks: &MaskSequence,
    tgt_masks: &MaskSequence,
    seed: u64,
    cfg: &AugmentConfig,
) -> Result<AugmentOutput> {
    src_masks.check_pairs(source, "source")?;
    tgt_masks.check_pairs(target, "target")?;
    let mut rng = keyed(seed, "scale_color_augment", 0);
    let (lo, hi) = AUGMENT_SCALE_RANGE;
    let scale_source = rng.random_range(lo..hi);
    let scale_target = rng.random_range(lo..hi);
    let color: [u8; 3] = [rng.random(), rng.random(), rng.random()];
    Ok(AugmentOutput {
        source: augment_clip(source, src_masks, scale_source, color, cfg.restore_size)?,
        target: augment_clip(target, tgt_masks, scale_target, color, cfg.restore_size)?,
        provenance: Provenance::ScaleColorAugment {
            seed,
            scale_source,
            scale_target,
            color,
            restore_size: cfg.restore_size,
        },
    })
}
