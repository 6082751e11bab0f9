use image::Rgb;

use super::ops::{center_crop_or_pad, crop_or_pad_with_offset, resize_by, round_half_away};
use super::{FrameSequence, Provenance, PAN_BOUND_RATIO};
use crate::error::{Error, Result};
use crate::rng::{keyed, Rng};

/// Closed range of synthetic zoom factors.
pub const ZOOM_RANGE: (f64, f64) = (1.0, 1.25);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZoomParams {
    Fixed { s_start: f64, s_end: f64 },
    /// Both endpoints drawn from `U(1.0, 1.25)`.
    Seeded(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PanParams {
    /// Offsets in pixels; positive moves content right/down.
    Fixed { o_start: [f64; 2], o_end: [f64; 2] },
    /// Both endpoints drawn uniformly from the bound box.
    Seeded(u64),
}

fn alpha(i: usize, t: usize) -> f64 {
    i as f64 / (t.saturating_sub(1)).max(1) as f64
}

/// `s_i = (1 − α)·s_start + α·s_end` with `α = i / max(T − 1, 1)`.
pub fn zoom_schedule(t: usize, s_start: f64, s_end: f64) -> Vec<f64> {
    (0..t)
        .map(|i| {
            let a = alpha(i, t);
            (1.0 - a) * s_start + a * s_end
        })
        .collect()
}

/// Per-frame rescale along a linear schedule, center cropped back to the
/// input size.
pub fn synthetic_zoom(seq: &FrameSequence, params: ZoomParams, fill: [u8; 3]) -> Result<(FrameSequence, Provenance)> {
    let (lo, hi) = ZOOM_RANGE;
    let (seed, s_start, s_end) = match params {
        ZoomParams::Fixed { s_start, s_end } => {
            for s in [s_start, s_end] {
                if !(lo..=hi).contains(&s) {
                    return Err(Error::InvalidRange(format!("zoom factor {s} outside [{lo}, {hi}]")));
                }
            }
            (None, s_start, s_end)
        }
        ZoomParams::Seeded(seed) => {
            let mut rng = keyed(seed, "synthetic_zoom", 0);
            let a = rng.random_range(lo..=hi);
            let b = rng.random_range(lo..=hi);
            (Some(seed), a, b)
        }
    };
    let (w, h) = seq.dimensions();
    let scales = zoom_schedule(seq.len(), s_start, s_end);
    let frames = seq
        .frames()
        .iter()
        .zip(&scales)
        .map(|(f, &s)| center_crop_or_pad(&resize_by(f, s)?, w, h, Rgb(fill)))
        .collect::<Result<Vec<_>>>()?;
    Ok((
        FrameSequence::new(frames, seq.fps)?,
        Provenance::SyntheticZoom { seed, s_start, s_end, scales, fill },
    ))
}

/// Per-frame integer shift along linearly interpolated offsets; uncovered
/// pixels take `fill`. `bounds` defaults to `0.15·(W, H)`.
pub fn synthetic_pan(
    seq: &FrameSequence,
    params: PanParams,
    bounds: Option<[f64; 2]>,
    fill: [u8; 3],
) -> Result<(FrameSequence, Provenance)> {
    let (w, h) = seq.dimensions();
    let bounds = bounds.unwrap_or([PAN_BOUND_RATIO * w as f64, PAN_BOUND_RATIO * h as f64]);
    if !bounds.iter().all(|b| *b >= 0.0 && b.is_finite()) {
        return Err(Error::InvalidOffset(format!("pan bounds {bounds:?} must be non-negative")));
    }
    let (seed, o_start, o_end) = match params {
        PanParams::Fixed { o_start, o_end } => {
            for o in [o_start, o_end] {
                if !(o[0].abs() <= bounds[0] && o[1].abs() <= bounds[1]) {
                    return Err(Error::InvalidOffset(format!(
                        "offset ({}, {}) exceeds bounds (±{}, ±{})",
                        o[0], o[1], bounds[0], bounds[1]
                    )));
                }
            }
            (None, o_start, o_end)
        }
        PanParams::Seeded(seed) => {
            let mut rng = keyed(seed, "synthetic_pan", 0);
            let mut draw = |b: f64| if b > 0.0 { rng.random_range(-b..=b) } else { 0.0 };
            let a = [draw(bounds[0]), draw(bounds[1])];
            let b = [draw(bounds[0]), draw(bounds[1])];
            (Some(seed), a, b)
        }
    };
    let t = seq.len();
    let offsets: Vec<[i64; 2]> = (0..t)
        .map(|i| {
            let a = alpha(i, t);
            let o = |k: usize| round_half_away((1.0 - a) * o_start[k] + a * o_end[k]) as i64;
            [o(0), o(1)]
        })
        .collect();
    let frames = seq
        .frames()
        .iter()
        .zip(&offsets)
        .map(|(f, o)| crop_or_pad_with_offset(f, w, h, o[0], o[1], Rgb(fill)))
        .collect::<Result<Vec<_>>>()?;
    Ok((
        FrameSequence::new(frames, seq.fps)?,
        Provenance::SyntheticPan {
            seed,
            bounds,
            o_start,
            o_end,
            offsets,
            fill,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::RgbImage;

    fn textured(n: usize, w: u32, h: u32) -> FrameSequence {
        let frames = (0..n)
            .map(|i| {
                RgbImage::from_fn(w, h, |x, y| {
                    let v = (x.wrapping_mul(2654435761) ^ y.wrapping_mul(40503) ^ i as u32) as u8;
                    Rgb([v, x as u8, y as u8])
                })
            })
            .collect();
        FrameSequence::new(frames, 30.0).unwrap()
    }

    #[test]
    fn schedule_is_linear() {
        assert_eq!(zoom_schedule(3, 1.0, 1.25), vec![1.0, 1.125, 1.25]);
        assert_eq!(zoom_schedule(1, 1.1, 1.2), vec![1.1]);
        let s = zoom_schedule(10, 1.0, 1.2);
        assert!(s.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn identity_zoom() {
        let seq = textured(4, 21, 13);
        let (out, _) = synthetic_zoom(&seq, ZoomParams::Fixed { s_start: 1.0, s_end: 1.0 }, [0; 3]).unwrap();
        assert_eq!(out, seq);
    }

    #[test]
    fn zoom_preserves_dimensions_and_rejects_range() {
        let seq = textured(5, 33, 20);
        let (out, prov) = synthetic_zoom(&seq, ZoomParams::Seeded(4), [0; 3]).unwrap();
        assert_eq!(out.dimensions(), (33, 20));
        assert_eq!(out.len(), 5);
        let Provenance::SyntheticZoom { s_start, s_end, .. } = prov else { unreachable!() };
        assert!((1.0..=1.25).contains(&s_start) && (1.0..=1.25).contains(&s_end));
        for bad in [(0.9, 1.0), (1.0, 1.3)] {
            assert!(matches!(
                synthetic_zoom(&seq, ZoomParams::Fixed { s_start: bad.0, s_end: bad.1 }, [0; 3]),
                Err(Error::InvalidRange(_))
            ));
        }
    }

    #[test]
    fn single_frame_uses_start_scale() {
        let seq = textured(1, 20, 20);
        let (out, prov) = synthetic_zoom(&seq, ZoomParams::Fixed { s_start: 1.2, s_end: 1.0 }, [0; 3]).unwrap();
        let Provenance::SyntheticZoom { scales, .. } = prov else { unreachable!() };
        assert_eq!(scales, vec![1.2]);
        let want = center_crop_or_pad(&resize_by(&seq.frames()[0], 1.2).unwrap(), 20, 20, Rgb([0; 3])).unwrap();
        assert_eq!(out.frames()[0], want);
    }

    /// Shift that best aligns `b` to `a` by exhaustive search.
    fn best_shift(a: &RgbImage, b: &RgbImage, r: i64) -> (i64, i64) {
        let (w, h) = (a.width() as i64, a.height() as i64);
        let mut best = (i64::MAX, (0, 0));
        for dy in -r..=r {
            for dx in -r..=r {
                let mut err = 0i64;
                for y in r..h - r {
                    for x in r..w - r {
                        let p = a.get_pixel(x as u32, y as u32);
                        let q = b.get_pixel((x + dx) as u32, (y + dy) as u32);
                        err += (p[0] as i64 - q[0] as i64).abs();
                    }
                }
                if err < best.0 {
                    best = (err, (dx, dy));
                }
            }
        }
        best.1
    }

    #[test]
    fn pan_shifts_by_frame_index() {
        let frame = textured(1, 40, 24).frames()[0].clone();
        let seq = FrameSequence::new(vec![frame.clone(); 11], 30.0).unwrap();
        let p = PanParams::Fixed { o_start: [0.0, 0.0], o_end: [10.0, 0.0] };
        let (out, _) = synthetic_pan(&seq, p, Some([10.0, 0.0]), [0; 3]).unwrap();
        for (i, f) in out.frames().iter().enumerate() {
            assert_eq!(best_shift(&frame, f, 10), (i as i64, 0));
        }
    }

    #[test]
    fn zero_pan_is_identity_and_bounds_enforced() {
        let seq = textured(3, 20, 20);
        let zero = PanParams::Fixed { o_start: [0.0; 2], o_end: [0.0; 2] };
        assert_eq!(synthetic_pan(&seq, zero, None, [0; 3]).unwrap().0, seq);
        let far = PanParams::Fixed { o_start: [0.0; 2], o_end: [3.1, 0.0] };
        assert!(matches!(synthetic_pan(&seq, far, None, [0; 3]), Err(Error::InvalidOffset(_))));
        let (_, prov) = synthetic_pan(&seq, PanParams::Seeded(9), None, [0; 3]).unwrap();
        let Provenance::SyntheticPan { o_start, o_end, .. } = prov else { unreachable!() };
        for o in [o_start, o_end] {
            assert!(o[0].abs() <= 3.0 && o[1].abs() <= 3.0);
        }
    }
}
