//! Clip directories: `frame_%05d.png` plus a `clip.json` sidecar.

use std::path::{Path, PathBuf};

use image::{GrayImage, Luma};
use serde::{Deserialize, Serialize};

use super::{FrameSequence, MaskSequence};
use crate::error::{Error, Result};
use crate::jsonio::{read_json, write_json};

pub const CLIP_SIDECAR: &str = "clip.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipInfo {
    pub width: u32,
    pub height: u32,
    pub fps: f64,
    pub count: usize,
}

pub fn frame_path(dir: &Path, i: usize) -> PathBuf {
    dir.join(format!("frame_{i:05}.png"))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn save_image<P, C>(img: &image::ImageBuffer<P, C>, path: &Path) -> Result<()>
where
    P: image::PixelWithColorType,
    [P::Subpixel]: image::EncodableLayout,
    C: std::ops::Deref<Target = [P::Subpixel]>,
{
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image { path: path.to_path_buf(), source })
}

fn open_image(path: &Path) -> Result<image::DynamicImage> {
    image::open(path).map_err(|source| match source {
        image::ImageError::IoError(e) => Error::io(path, e),
        source => Error::Image { path: path.to_path_buf(), source },
    })
}

pub fn write_clip(dir: &Path, seq: &FrameSequence) -> Result<()> {
    ensure_dir(dir)?;
    for (i, f) in seq.frames().iter().enumerate() {
        save_image(f, &frame_path(dir, i))?;
    }
    let (width, height) = seq.dimensions();
    write_json(
        &dir.join(CLIP_SIDECAR),
        &ClipInfo { width, height, fps: seq.fps, count: seq.len() },
    )
}

pub fn read_clip(dir: &Path) -> Result<FrameSequence> {
    let info: ClipInfo = read_json(&dir.join(CLIP_SIDECAR))?;
    let frames = (0..info.count)
        .map(|i| Ok(open_image(&frame_path(dir, i))?.to_rgb8()))
        .collect::<Result<Vec<_>>>()?;
    let seq = FrameSequence::new(frames, info.fps)?;
    if seq.dimensions() != (info.width, info.height) {
        return Err(Error::DimensionMismatch(format!(
            "{}: frames are {}x{}, sidecar says {}x{}",
            dir.display(),
            seq.dimensions().0,
            seq.dimensions().1,
            info.width,
            info.height
        )));
    }
    Ok(seq)
}

/// Masks as 0/255 single-channel PNGs.
pub fn write_masks(dir: &Path, masks: &MaskSequence) -> Result<()> {
    ensure_dir(dir)?;
    for (i, m) in masks.masks().iter().enumerate() {
        let img = GrayImage::from_fn(m.width(), m.height(), |x, y| Luma([m.get_pixel(x, y)[0] * 255]));
        save_image(&img, &frame_path(dir, i))?;
    }
    Ok(())
}

/// Reads `count` masks; values of 128 and above count as foreground.
pub fn read_masks(dir: &Path, count: usize) -> Result<MaskSequence> {
    let masks = (0..count)
        .map(|i| {
            let g = open_image(&frame_path(dir, i))?.to_luma8();
            Ok(GrayImage::from_fn(g.width(), g.height(), |x, y| {
                Luma([(g.get_pixel(x, y)[0] >= 128) as u8])
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    MaskSequence::new(masks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{Rgb, RgbImage};

    #[test]
    fn clip_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let frames: Vec<_> = (0..3)
            .map(|i| RgbImage::from_fn(7, 5, |x, y| Rgb([x as u8 * 30, y as u8 * 40, i * 50])))
            .collect();
        let seq = FrameSequence::new(frames, 29.97).unwrap();
        write_clip(dir.path(), &seq).unwrap();
        assert!(frame_path(dir.path(), 2).ends_with("frame_00002.png"));
        assert_eq!(read_clip(dir.path()).unwrap(), seq);
    }

    #[test]
    fn mask_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = MaskSequence::new(vec![GrayImage::from_fn(6, 4, |x, _| Luma([(x % 2) as u8])); 2]).unwrap();
        write_masks(dir.path(), &m).unwrap();
        let raw = image::open(frame_path(dir.path(), 0)).unwrap().to_luma8();
        assert!(raw.pixels().all(|p| p[0] == 0 || p[0] == 255));
        assert_eq!(read_masks(dir.path(), 2).unwrap(), m);
    }

    #[test]
    fn missing_clip_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        assert!(read_clip(&dir.path().join("nope")).is_err());
        assert!(matches!(read_masks(dir.path(), 1), Err(Error::Io { .. })));
    }
}
