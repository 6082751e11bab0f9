//! Training-data generation: scale/color augmentation, synthetic zoom and
//! pan, and multi-shot stitching over frame sequences.
//!
//! Every random draw comes from a stream keyed by `(seed, op, index)`, so a
//! seed fully determines an op's output.

mod augment;
mod clip;
mod motion;
pub mod ops;
mod stitch;

use image::{GrayImage, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use augment::{scale_color_augment, AugmentConfig, AugmentOutput};
pub use clip::{frame_path, read_clip, read_masks, write_clip, write_masks, ClipInfo};
pub use motion::{synthetic_pan, synthetic_zoom, zoom_schedule, PanParams, ZoomParams, ZOOM_RANGE};
pub use stitch::{multishot_stitch, Segment, StitchOutput, DEFAULT_K_MAX};

/// Scale range of the per-clip rescale in [`scale_color_augment`].
pub const AUGMENT_SCALE_RANGE: (f64, f64) = (0.75, 1.25);

/// Default pan bound as a fraction of `(W, H)`.
pub const PAN_BOUND_RATIO: f64 = 0.15;

/// Equal-size RGB frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<RgbImage>,
    pub fps: f64,
}

impl FrameSequence {
    pub fn new(frames: Vec<RgbImage>, fps: f64) -> Result<Self> {
        let Some(first) = frames.first() else {
            return Err(Error::schema("frame sequence is empty"));
        };
        let dims = first.dimensions();
        if dims.0 == 0 || dims.1 == 0 {
            return Err(Error::ZeroDimension);
        }
        if let Some((i, f)) = frames.iter().enumerate().find(|(_, f)| f.dimensions() != dims) {
            return Err(Error::DimensionMismatch(format!(
                "frame {i} is {}x{}, expected {}x{}",
                f.width(),
                f.height(),
                dims.0,
                dims.1
            )));
        }
        Ok(FrameSequence { frames, fps })
    }

    pub fn frames(&self) -> &[RgbImage] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<RgbImage> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dimensions(&self) -> (u32, u32) {
        self.frames[0].dimensions()
    }
}

/// Binary masks stored as 0/1 per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSequence {
    masks: Vec<GrayImage>,
}

impl MaskSequence {
    pub fn new(masks: Vec<GrayImage>) -> Result<Self> {
        if let Some(i) = masks.iter().position(|m| m.pixels().any(|p| p[0] > 1)) {
            return Err(Error::schema(format!("mask {i} has values other than 0 and 1")));
        }
        Ok(MaskSequence { masks })
    }

    /// Masks that are 1 everywhere (`value = true`) or 0 everywhere.
    pub fn uniform(len: usize, w: u32, h: u32, value: bool) -> Self {
        MaskSequence {
            masks: vec![GrayImage::from_pixel(w, h, image::Luma([value as u8])); len],
        }
    }

    pub fn masks(&self) -> &[GrayImage] {
        &self.masks
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    fn check_pairs(&self, seq: &FrameSequence, label: &str) -> Result<()> {
        if self.len() != seq.len() {
            return Err(Error::DimensionMismatch(format!(
                "{label}: {} masks for {} frames",
                self.len(),
                seq.len()
            )));
        }
        let dims = seq.dimensions();
        if let Some(i) = self.masks.iter().position(|m| m.dimensions() != dims) {
            return Err(Error::DimensionMismatch(format!("{label}: mask {i} size differs from its frame")));
        }
        Ok(())
    }
}

/// Drawn parameters of one datagen op, written as `provenance.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Provenance {
    ScaleColorAugment {
        seed: u64,
        scale_source: f64,
        scale_target: f64,
        color: [u8; 3],
        restore_size: bool,
    },
    SyntheticZoom {
        seed: Option<u64>,
        s_start: f64,
        s_end: f64,
        scales: Vec<f64>,
        fill: [u8; 3],
    },
    SyntheticPan {
        seed: Option<u64>,
        bounds: [f64; 2],
        o_start: [f64; 2],
        o_end: [f64; 2],
        offsets: Vec<[i64; 2]>,
        fill: [u8; 3],
    },
    MultishotStitch {
        seed: u64,
        k_max: usize,
        k_drawn: usize,
        k: usize,
        segments: Vec<Segment>,
    },
}
