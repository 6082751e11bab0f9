use image::RgbImage;

use crate::datagen::FrameSequence;
use crate::error::{Error, Result};

/// Cap applied to per-frame PSNR when averaging, so identical frames do
/// not dominate.
pub const PSNR_CAP_DB: f64 = 100.0;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

fn check_frames(a: &RgbImage, b: &RgbImage) -> Result<()> {
    if a.dimensions() != b.dimensions() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

fn check_sequences(a: &FrameSequence, b: &FrameSequence) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("{} frames vs {}", a.len(), b.len())));
    }
    check_frames(&a.frames()[0], &b.frames()[0])
}

/// `10·log10(255²/MSE)` over all channels; `+∞` for identical frames.
pub fn psnr_frame(a: &RgbImage, b: &RgbImage) -> Result<f64> {
    check_frames(a, b)?;
    let sse: u64 = a
        .as_raw()
        .iter()
        .zip(b.as_raw())
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    if sse == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = sse as f64 / a.as_raw().len() as f64;
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

/// Mean per-frame PSNR with each frame capped at [`PSNR_CAP_DB`]; `+∞` only
/// when every frame is identical.
pub fn psnr(a: &FrameSequence, b: &FrameSequence) -> Result<f64> {
    check_sequences(a, b)?;
    let per = a
        .frames()
        .iter()
        .zip(b.frames())
        .map(|(x, y)| psnr_frame(x, y))
        .collect::<Result<Vec<_>>>()?;
    if per.iter().all(|v| v.is_infinite()) {
        return Ok(f64::INFINITY);
    }
    Ok(per.iter().map(|v| v.min(PSNR_CAP_DB)).sum::<f64>() / per.len() as f64)
}

fn gaussian(size: usize) -> Vec<f64> {
    let c = (size / 2) as f64;
    let w: Vec<f64> = (0..size)
        .map(|i| (-((i as f64 - c).powi(2)) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

/// Separable valid-region filter: output is `(w − n + 1) × (h − n + 1)`.
fn filter_valid(src: &[f64], w: usize, h: usize, g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let (ow, oh) = (w - n + 1, h - n + 1);
    let mut tmp = vec![0.0; ow * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..ow {
            tmp[y * ow + x] = g.iter().zip(&row[x..x + n]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = g.iter().enumerate().map(|(j, a)| a * tmp[(y + j) * ow + x]).sum();
        }
    }
    out
}

fn ssim_channel(a: &[f64], b: &[f64], w: usize, h: usize, g: &[f64]) -> f64 {
    let prod = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| x * y).collect::<Vec<_>>();
    let mu_a = filter_valid(a, w, h, g);
    let mu_b = filter_valid(b, w, h, g);
    let aa = filter_valid(&prod(a, a), w, h, g);
    let bb = filter_valid(&prod(b, b), w, h, g);
    let ab = filter_valid(&prod(a, b), w, h, g);
    let n = mu_a.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = aa[i] - ma * ma;
            let vb = bb[i] - mb * mb;
            let cov = ab[i] - ma * mb;
            ((2.0 * ma * mb + C1) * (2.0 * cov + C2)) / ((ma * ma + mb * mb + C1) * (va + vb + C2))
        })
        .sum();
    total / n as f64
}

/// Mean SSIM over RGB channels with an 11×11 Gaussian window (σ = 1.5)
/// over the valid region. Frames smaller than the window use the largest
/// odd window that fits.
pub fn ssim_frame(a: &RgbImage, b: &RgbImage) -> Result<f64> {
    check_frames(a, b)?;
    let (w, h) = (a.width() as usize, a.height() as usize);
    let mut size = SSIM_WINDOW.min(w).min(h);
    if size % 2 == 0 {
        size -= 1;
    }
    let g = gaussian(size);
    let channel = |img: &RgbImage, c: usize| img.as_raw().iter().skip(c).step_by(3).map(|&v| v as f64).collect::<Vec<_>>();
    let sum: f64 = (0..3).map(|c| ssim_channel(&channel(a, c), &channel(b, c), w, h, &g)).sum();
    Ok(sum / 3.0)
}

pub fn ssim(a: &FrameSequence, b: &FrameSequence) -> Result<f64> {
    check_sequences(a, b)?;
    let per = a
        .frames()
        .iter()
        .zip(b.frames())
        .map(|(x, y)| ssim_frame(x, y))
        .collect::<Result<Vec<_>>>()?;
    Ok(per.iter().sum::<f64>() / per.len() as f64)
}
