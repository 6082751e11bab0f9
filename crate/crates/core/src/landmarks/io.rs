use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{layout, LandmarkFrame2D, LandmarkTemplate3D, SemanticGroup};
use crate::camera::{Pixel2, Point3};
use crate::error::{Error, Result};
use crate::jsonio::{read_json, write_json};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplatePointRecord {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<SemanticGroup>,
}

/// Wire format of a 3D landmark template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateFile {
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
    pub points: Vec<TemplatePointRecord>,
}

impl TemplateFile {
    pub fn from_template(t: &LandmarkTemplate3D) -> Self {
        TemplateFile {
            count: t.len(),
            image_ref: None,
            points: t
                .points()
                .iter()
                .zip(t.ids())
                .zip(t.groups())
                .map(|((p, &id), &g)| TemplatePointRecord {
                    id,
                    x: p.x,
                    y: p.y,
                    z: p.z,
                    group: Some(g),
                })
                .collect(),
        }
    }

    /// Validates and renormalizes. A 68-point file with ids `0..68` gets the
    /// built-in face connectivity.
    pub fn into_template(self) -> Result<LandmarkTemplate3D> {
        if self.count != self.points.len() {
            return Err(Error::CountMismatch {
                expected: self.count,
                found: self.points.len(),
            });
        }
        let mut ids: Vec<u32> = self.points.iter().map(|p| p.id).collect();
        let points = self.points.iter().map(|p| Point3::new(p.x, p.y, p.z)).collect();
        let groups = self
            .points
            .iter()
            .map(|p| p.group.unwrap_or(SemanticGroup::Other))
            .collect();
        let t = LandmarkTemplate3D::new(points, ids.clone(), groups)?;
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::schema("duplicate landmark id"));
        }
        let face68 = t.len() == 68 && t.ids().iter().enumerate().all(|(i, &id)| id as usize == i);
        if face68 {
            t.with_edges(layout::face68_edges())
        } else {
            Ok(t)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FramePointRecord {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub visible: bool,
}

/// Wire format of per-frame 2D landmarks, coordinates normalized to `[0, 1]`
/// of the declared image size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandmarkFramesFile {
    pub width: u32,
    pub height: u32,
    pub frames: Vec<Vec<FramePointRecord>>,
}

impl LandmarkFramesFile {
    pub fn from_frames(frames: &[LandmarkFrame2D], ids: &[u32], width: u32, height: u32) -> Self {
        let (w, h) = (width as f64, height as f64);
        LandmarkFramesFile {
            width,
            height,
            frames: frames
                .iter()
                .map(|f| {
                    f.points
                        .iter()
                        .zip(&f.visibility)
                        .enumerate()
                        .map(|(i, (p, &visible))| FramePointRecord {
                            id: ids.get(i).copied().unwrap_or(i as u32),
                            x: if visible { p.x / w } else { 0.0 },
                            y: if visible { p.y / h } else { 0.0 },
                            visible,
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// Pixel-space frames. Every frame must carry the same number of points.
    pub fn to_frames(&self) -> Result<Vec<LandmarkFrame2D>> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::ZeroDimension);
        }
        let (w, h) = (self.width as f64, self.height as f64);
        let m = self.frames.first().map_or(0, Vec::len);
        self.frames
            .iter()
            .map(|recs| {
                if recs.len() != m {
                    return Err(Error::CountMismatch { expected: m, found: recs.len() });
                }
                let mut f = LandmarkFrame2D {
                    points: Vec::with_capacity(m),
                    visibility: Vec::with_capacity(m),
                };
                for r in recs {
                    if r.visible && !(r.x.is_finite() && r.y.is_finite()) {
                        return Err(Error::schema(format!("landmark {} has non-finite coordinates", r.id)));
                    }
                    f.points.push(if r.visible {
                        Pixel2::new(r.x * w, r.y * h)
                    } else {
                        Pixel2::origin()
                    });
                    f.visibility.push(r.visible);
                }
                Ok(f)
            })
            .collect()
    }
}

pub fn load_landmark_template(path: &Path) -> Result<LandmarkTemplate3D> {
    read_json::<TemplateFile>(path)?.into_template()
}

pub fn save_landmark_template(path: &Path, t: &LandmarkTemplate3D) -> Result<()> {
    write_json(path, &TemplateFile::from_template(t))
}

pub fn load_landmark_frames(path: &Path) -> Result<(LandmarkFramesFile, Vec<LandmarkFrame2D>)> {
    let file: LandmarkFramesFile = read_json(path)?;
    let frames = file.to_frames()?;
    Ok((file, frames))
}

pub fn save_landmark_frames(
    path: &Path,
    frames: &[LandmarkFrame2D],
    ids: &[u32],
    width: u32,
    height: u32,
) -> Result<()> {
    write_json(path, &LandmarkFramesFile::from_frames(frames, ids, width, height))
}
