//! Resampling and crop/pad primitives with fixed rounding rules.

use image::{GrayImage, ImageBuffer, Pixel, RgbImage};

use crate::error::{Error, Result};

/// Round half away from zero.
pub fn round_half_away(v: f64) -> f64 {
    v.signum() * (v.abs() + 0.5).floor()
}

/// Output size of a resize by `s`, at least 1 pixel per axis.
pub fn scaled_size(w: u32, h: u32, s: f64) -> Result<(u32, u32)> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidScale(s));
    }
    let sw = round_half_away(w as f64 * s);
    let sh = round_half_away(h as f64 * s);
    if w == 0 || h == 0 || sw < 1.0 || sh < 1.0 {
        return Err(Error::ZeroDimension);
    }
    Ok((sw as u32, sh as u32))
}

/// Source coordinate of output sample `x` (pixel centers aligned), clamped
/// to the valid range.
fn source_coord(x: u32, in_len: u32, out_len: u32) -> f64 {
    let s = (x as f64 + 0.5) * in_len as f64 / out_len as f64 - 0.5;
    s.clamp(0.0, (in_len - 1) as f64)
}

/// Bilinear resampling to `out_w × out_h`.
pub fn resize_bilinear(img: &RgbImage, out_w: u32, out_h: u32) -> Result<RgbImage> {
    let (w, h) = img.dimensions();
    if w == 0 || h == 0 || out_w == 0 || out_h == 0 {
        return Err(Error::ZeroDimension);
    }
    if (w, h) == (out_w, out_h) {
        return Ok(img.clone());
    }
    let xs: Vec<(u32, u32, f64)> = (0..out_w)
        .map(|x| {
            let s = source_coord(x, w, out_w);
            let x0 = s.floor() as u32;
            (x0, (x0 + 1).min(w - 1), s - x0 as f64)
        })
        .collect();
    let mut out = RgbImage::new(out_w, out_h);
    for y in 0..out_h {
        let s = source_coord(y, h, out_h);
        let y0 = s.floor() as u32;
        let y1 = (y0 + 1).min(h - 1);
        let fy = s - y0 as f64;
        for (x, &(x0, x1, fx)) in xs.iter().enumerate() {
            let (a, b) = (img.get_pixel(x0, y0).0, img.get_pixel(x1, y0).0);
            let (c, d) = (img.get_pixel(x0, y1).0, img.get_pixel(x1, y1).0);
            let mut px = [0u8; 3];
            for k in 0..3 {
                let top = a[k] as f64 + fx * (b[k] as f64 - a[k] as f64);
                let bot = c[k] as f64 + fx * (d[k] as f64 - c[k] as f64);
                let v = top + fy * (bot - top);
                px[k] = round_half_away(v).clamp(0.0, 255.0) as u8;
            }
            out.put_pixel(x as u32, y, image::Rgb(px));
        }
    }
    Ok(out)
}

/// Nearest-neighbor resampling, used for binary masks.
pub fn resize_nearest(img: &GrayImage, out_w: u32, out_h: u32) -> Result<GrayImage> {
    let (w, h) = img.dimensions();
    if w == 0 || h == 0 || out_w == 0 || out_h == 0 {
        return Err(Error::ZeroDimension);
    }
    let pick = |x: u32, n: u32, m: u32| (((x as f64 + 0.5) * n as f64 / m as f64).floor() as u32).min(n - 1);
    Ok(GrayImage::from_fn(out_w, out_h, |x, y| {
        *img.get_pixel(pick(x, w, out_w), pick(y, h, out_h))
    }))
}

pub fn resize_by(img: &RgbImage, s: f64) -> Result<RgbImage> {
    let (w, h) = scaled_size(img.width(), img.height(), s)?;
    resize_bilinear(img, w, h)
}

/// `out(x, y) = in(x − ox, y − oy)`, `fill` where the source is outside.
pub fn crop_or_pad_with_offset<P: Pixel>(
    img: &ImageBuffer<P, Vec<P::Subpixel>>,
    out_w: u32,
    out_h: u32,
    ox: i64,
    oy: i64,
    fill: P,
) -> Result<ImageBuffer<P, Vec<P::Subpixel>>> {
    if out_w == 0 || out_h == 0 || img.width() == 0 || img.height() == 0 {
        return Err(Error::ZeroDimension);
    }
    let (w, h) = (img.width() as i64, img.height() as i64);
    Ok(ImageBuffer::from_fn(out_w, out_h, |x, y| {
        let (sx, sy) = (x as i64 - ox, y as i64 - oy);
        if (0..w).contains(&sx) && (0..h).contains(&sy) {
            *img.get_pixel(sx as u32, sy as u32)
        } else {
            fill
        }
    }))
}

/// Offset that centers an `in_len` axis in `out_len`; the odd remainder goes
/// to the trailing edge.
pub fn center_offset(in_len: u32, out_len: u32) -> i64 {
    (out_len as i64 - in_len as i64) / 2
}

pub fn center_crop_or_pad<P: Pixel>(
    img: &ImageBuffer<P, Vec<P::Subpixel>>,
    out_w: u32,
    out_h: u32,
    fill: P,
) -> Result<ImageBuffer<P, Vec<P::Subpixel>>> {
    let ox = center_offset(img.width(), out_w);
    let oy = center_offset(img.height(), out_h);
    crop_or_pad_with_offset(img, out_w, out_h, ox, oy, fill)
}
