use serde::{Deserialize, Serialize};

use super::{FrameSequence, Provenance};
use crate::error::{Error, Result};
use crate::rng::{keyed, sample_distinct, Rng};

pub const DEFAULT_K_MAX: usize = 4;

/// One shot: frames `start..=end` (1-based, inclusive) of clip `clip`
/// (0-based index into the input list).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub clip: usize,
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn frame_count(&self) -> usize {
        self.end - self.start + 1
    }
}

#[derive(Debug, Clone)]
pub struct StitchOutput {
    pub sequence: FrameSequence,
    pub segments: Vec<Segment>,
    pub provenance: Provenance,
}

/// Draws `K ~ U{1..k_max}` shots from distinct clips and concatenates one
/// random segment `[a, b]` (`a < b`) of each, in draw order. `K` is clamped
/// to the number of clips.
pub fn multishot_stitch(clips: &[FrameSequence], seed: u64, k_max: usize) -> Result<StitchOutput> {
    if clips.is_empty() {
        return Err(Error::TooFewClips);
    }
    if k_max == 0 {
        return Err(Error::Config("k_max must be at least 1".into()));
    }
    let dims = clips[0].dimensions();
    for (i, c) in clips.iter().enumerate() {
        if c.dimensions() != dims {
            return Err(Error::DimensionMismatch(format!("clip {i} size differs from clip 0")));
        }
        if c.len() < 2 {
            return Err(Error::ClipTooShort { index: i, len: c.len() });
        }
    }
    let mut rng = keyed(seed, "multishot_stitch", 0);
    let k_drawn = rng.random_range(1..=k_max);
    let k = k_drawn.min(clips.len());
    if k < k_drawn {
        log::info!("multishot_stitch: drew {k_drawn} shots, clamped to {} clips", clips.len());
    }
    let order = sample_distinct(&mut rng, clips.len(), k);
    let mut segments = Vec::with_capacity(k);
    let mut frames = Vec::new();
    for (j, &clip) in order.iter().enumerate() {
        let mut shot = keyed(seed, "multishot_stitch", 1 + j as u64);
        let t = clips[clip].len();
        let start = shot.random_range(1..=t - 1);
        let end = shot.random_range(start + 1..=t);
        frames.extend_from_slice(&clips[clip].frames()[start - 1..end]);
        segments.push(Segment { clip, start, end });
    }
    Ok(StitchOutput {
        sequence: FrameSequence::new(frames, clips[0].fps)?,
        provenance: Provenance::MultishotStitch {
            seed,
            k_max,
            k_drawn,
            k,
            segments: segments.clone(),
        },
        segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{Rgb, RgbImage};

    /// Clip `c` frame `i` (0-based) is a solid color encoding `(c, i)`.
    fn clips(n: usize, t: usize) -> Vec<FrameSequence> {
        (0..n)
            .map(|c| {
                let frames = (0..t).map(|i| RgbImage::from_pixel(4, 3, Rgb([c as u8, i as u8, 0]))).collect();
                FrameSequence::new(frames, 25.0).unwrap()
            })
            .collect()
    }

    #[test]
    fn output_matches_drawn_segments() {
        let cs = clips(6, 9);
        for seed in 0..100 {
            let out = multishot_stitch(&cs, seed, 4).unwrap();
            let total: usize = out.segments.iter().map(Segment::frame_count).sum();
            assert_eq!(out.sequence.len(), total);
            assert!((1..=4).contains(&out.segments.len()));
            let mut seen = std::collections::HashSet::new();
            let mut fi = 0;
            for s in &out.segments {
                assert!(seen.insert(s.clip));
                assert!(1 <= s.start && s.start < s.end && s.end <= 9);
                for i in s.start..=s.end {
                    assert_eq!(out.sequence.frames()[fi].get_pixel(0, 0).0, [s.clip as u8, (i - 1) as u8, 0]);
                    fi += 1;
                }
            }
        }
    }

    #[test]
    fn single_clip_forces_one_shot() {
        let cs = clips(1, 5);
        for seed in 0..20 {
            let out = multishot_stitch(&cs, seed, 4).unwrap();
            assert_eq!(out.segments.len(), 1);
            assert_eq!(out.segments[0].clip, 0);
        }
    }

    #[test]
    fn seed_fixes_boundaries() {
        let cs = clips(5, 12);
        let a = multishot_stitch(&cs, 7, 4).unwrap();
        let b = multishot_stitch(&cs, 7, 4).unwrap();
        assert_eq!(a.segments, b.segments);
        assert_eq!(a.sequence, b.sequence);
        assert_eq!(a.provenance, b.provenance);
    }

    #[test]
    fn input_validation() {
        assert!(matches!(multishot_stitch(&[], 0, 4), Err(Error::TooFewClips)));
        let short = clips(2, 1);
        assert!(matches!(multishot_stitch(&short, 0, 4), Err(Error::ClipTooShort { index: 0, len: 1 })));
        let mut mixed = clips(2, 4);
        mixed.push(FrameSequence::new(vec![RgbImage::new(5, 3); 4], 25.0).unwrap());
        assert!(matches!(multishot_stitch(&mixed, 0, 4), Err(Error::DimensionMismatch(_))));
    }
}
