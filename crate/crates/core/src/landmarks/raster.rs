use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, RgbImage};
use serde::{Deserialize, Serialize};

use super::{LandmarkFrame2D, LandmarkTemplate3D, SemanticGroup};
use crate::error::{Error, Result};

const SUPERSAMPLE: u32 = 4;

/// RGB color per semantic group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroupColors {
    pub contour: [u8; 3],
    pub brow: [u8; 3],
    pub eye: [u8; 3],
    pub nose: [u8; 3],
    pub lips: [u8; 3],
    pub iris: [u8; 3],
    pub other: [u8; 3],
}

impl Default for GroupColors {
    fn default() -> Self {
        GroupColors {
            contour: [255, 255, 255],
            brow: [255, 170, 0],
            eye: [0, 200, 255],
            nose: [0, 255, 80],
            lips: [255, 40, 90],
            iris: [160, 80, 255],
            other: [220, 220, 220],
        }
    }
}

impl GroupColors {
    pub fn get(&self, g: SemanticGroup) -> [u8; 3] {
        match g {
            SemanticGroup::Contour => self.contour,
            SemanticGroup::Brow => self.brow,
            SemanticGroup::Eye => self.eye,
            SemanticGroup::Nose => self.nose,
            SemanticGroup::Lips => self.lips,
            SemanticGroup::Iris => self.iris,
            SemanticGroup::Other => self.other,
        }
    }
}

/// Drawing parameters. The serialized part is user configuration; groups
/// and edges are bound from a template with [`RasterStyle::bind`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RasterStyle {
    pub point_radius_px: f64,
    pub line_width_px: f64,
    /// Draw the template's edge table.
    pub connectivity: bool,
    pub colors: GroupColors,
    pub background: [u8; 3],
    pub anti_aliasing: bool,
    #[serde(skip)]
    groups: Vec<SemanticGroup>,
    #[serde(skip)]
    edges: Vec<(usize, usize)>,
}

impl Default for RasterStyle {
    fn default() -> Self {
        RasterStyle {
            point_radius_px: 2.0,
            line_width_px: 1.5,
            connectivity: true,
            colors: GroupColors::default(),
            background: [0, 0, 0],
            anti_aliasing: true,
            groups: Vec::new(),
            edges: Vec::new(),
        }
    }
}

impl RasterStyle {
    pub fn for_template(t: &LandmarkTemplate3D) -> Self {
        RasterStyle::default().bind(t)
    }

    pub fn bind(mut self, t: &LandmarkTemplate3D) -> Self {
        self.groups = t.groups().to_vec();
        self.edges = t.edges().to_vec();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.point_radius_px > 0.0 && self.point_radius_px.is_finite()) {
            return Err(Error::Config(format!("point_radius_px {} must be positive", self.point_radius_px)));
        }
        if !(self.line_width_px > 0.0 && self.line_width_px.is_finite()) {
            return Err(Error::Config(format!("line_width_px {} must be positive", self.line_width_px)));
        }
        Ok(())
    }

    fn color_of(&self, i: usize) -> [u8; 3] {
        self.colors
            .get(self.groups.get(i).copied().unwrap_or(SemanticGroup::Other))
    }
}

/// 8-bit RGB landmark rendering, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionMap {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl ConditionMap {
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn to_image(&self) -> RgbImage {
        RgbImage::from_raw(self.width, self.height, self.data.clone())
            .expect("buffer length matches dimensions")
    }

    pub fn png_bytes(&self) -> Vec<u8> {
        let mut buf = Cursor::new(Vec::new());
        self.to_image()
            .write_to(&mut buf, ImageFormat::Png)
            .expect("in-memory PNG encoding");
        buf.into_inner()
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.png_bytes()).map_err(|e| Error::io(path, e))
    }
}

struct Canvas {
    w: i64,
    h: i64,
    ss: u32,
    buf: Vec<u8>,
}

impl Canvas {
    /// Fills every sample whose center (in output-pixel units) satisfies
    /// `inside`, restricted to the bounding box `[x0, x1] × [y0, y1]`.
    fn fill(&mut self, bbox: (f64, f64, f64, f64), color: [u8; 3], inside: impl Fn(f64, f64) -> bool) {
        let ss = self.ss as f64;
        let to_s = |v: f64| (v + 0.5) * ss - 0.5;
        let sx0 = to_s(bbox.0).floor().max(0.0);
        let sx1 = to_s(bbox.1).ceil().min((self.w - 1) as f64);
        let sy0 = to_s(bbox.2).floor().max(0.0);
        let sy1 = to_s(bbox.3).ceil().min((self.h - 1) as f64);
        if !(sx0 <= sx1 && sy0 <= sy1) {
            return;
        }
        for sy in sy0 as i64..=sy1 as i64 {
            let y = (sy as f64 + 0.5) / ss - 0.5;
            for sx in sx0 as i64..=sx1 as i64 {
                let x = (sx as f64 + 0.5) / ss - 0.5;
                if inside(x, y) {
                    let i = 3 * (sy * self.w + sx) as usize;
                    self.buf[i..i + 3].copy_from_slice(&color);
                }
            }
        }
    }
}

fn segment_dist2(px: f64, py: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((px - a.0) * dx + (py - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qx, qy) = (a.0 + t * dx - px, a.1 + t * dy - py);
    qx * qx + qy * qy
}

/// Draws edges as capsules of width `line_width_px`, then points as disks of
/// radius `point_radius_px`. With anti-aliasing each output pixel is the
/// rounded mean of a 4×4 block of binary samples. Geometry outside the frame
/// is clipped.
pub fn rasterize(frame: &LandmarkFrame2D, style: &RasterStyle, w: u32, h: u32) -> ConditionMap {
    let ss = if style.anti_aliasing { SUPERSAMPLE } else { 1 };
    let (sw, sh) = (w as i64 * ss as i64, h as i64 * ss as i64);
    let mut canvas = Canvas {
        w: sw,
        h: sh,
        ss,
        buf: style.background.repeat((sw * sh) as usize),
    };
    let pt = |i: usize| (frame.points[i].x, frame.points[i].y);
    let drawable = |i: usize| {
        i < frame.points.len()
            && frame.visibility[i]
            && frame.points[i].x.is_finite()
            && frame.points[i].y.is_finite()
    };

    if style.connectivity {
        let hw = 0.5 * style.line_width_px;
        for &(a, b) in &style.edges {
            if !(drawable(a) && drawable(b)) {
                continue;
            }
            let (pa, pb) = (pt(a), pt(b));
            let bbox = (
                pa.0.min(pb.0) - hw,
                pa.0.max(pb.0) + hw,
                pa.1.min(pb.1) - hw,
                pa.1.max(pb.1) + hw,
            );
            canvas.fill(bbox, style.color_of(a), |x, y| segment_dist2(x, y, pa, pb) <= hw * hw);
        }
    }
    let r = style.point_radius_px;
    for i in 0..frame.points.len() {
        if !drawable(i) {
            continue;
        }
        let (cx, cy) = pt(i);
        canvas.fill((cx - r, cx + r, cy - r, cy + r), style.color_of(i), |x, y| {
            (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r
        });
    }

    if ss == 1 {
        return ConditionMap { width: w, height: h, data: canvas.buf };
    }
    let n = (ss * ss) as u32;
    let mut data = vec![0u8; (w * h * 3) as usize];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let mut acc = [0u32; 3];
            for dy in 0..ss as i64 {
                let row = (y * ss as i64 + dy) * sw;
                for dx in 0..ss as i64 {
                    let i = 3 * (row + x * ss as i64 + dx) as usize;
                    for c in 0..3 {
                        acc[c] += canvas.buf[i + c] as u32;
                    }
                }
            }
            let o = 3 * (y * w as i64 + x) as usize;
            for c in 0..3 {
                data[o + c] = ((acc[c] + n / 2) / n) as u8;
            }
        }
    }
    ConditionMap { width: w, height: h, data }
}
