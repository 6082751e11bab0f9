use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{correctness_label, head_pose_delta, psnr, ssim, PoseDelta, Thresholds, PSNR_CAP_DB};
use crate::camera::Intrinsics;
use crate::datagen::FrameSequence;
use crate::error::{Error, Result};
use crate::landmarks::{LandmarkFrame2D, LandmarkTemplate3D};
use crate::par::par_map;
use crate::trajectory::MotionKind;

/// PSNR in dB; `+∞` is written as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Psnr(pub f64);

impl Serialize for Psnr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Psnr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Psnr(v)),
            Raw::Str(s) if s == "inf" => Ok(Psnr(f64::INFINITY)),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("invalid PSNR '{s}'"))),
        }
    }
}

/// One video to evaluate. `generated` and `reference` are both needed for
/// PSNR/SSIM.
#[derive(Debug, Clone)]
pub struct VideoInput {
    pub name: String,
    pub intended: Option<MotionKind>,
    pub landmarks: Vec<LandmarkFrame2D>,
    pub generated: Option<FrameSequence>,
    pub reference: Option<FrameSequence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoReport {
    pub name: String,
    pub intended: Option<MotionKind>,
    pub frames: usize,
    pub delta: PoseDelta,
    /// Label for the intended motion.
    pub correct: Option<bool>,
    /// Label the same delta receives for the opposite motion.
    pub opposite: Option<bool>,
    pub psnr_db: Option<Psnr>,
    pub ssim: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub videos: usize,
    pub labeled: usize,
    /// Percent of labeled videos judged correct.
    pub camera_correctness_pct: Option<f64>,
    /// Percent of labeled videos that also pass the opposite motion's rule.
    pub opposite_pct: Option<f64>,
    /// Mean over videos, each capped at the PSNR cap.
    pub mean_psnr_db: Option<f64>,
    pub mean_ssim: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub thresholds: Thresholds,
    pub videos: Vec<VideoReport>,
    pub aggregate: Aggregate,
    pub external: BTreeMap<String, String>,
}

pub fn evaluate_video(
    input: &VideoInput,
    template: &LandmarkTemplate3D,
    k: &Intrinsics,
    thresholds: &Thresholds,
) -> Result<VideoReport> {
    let (Some(first), Some(last)) = (input.landmarks.first(), input.landmarks.last()) else {
        return Err(Error::schema(format!("{}: no landmark frames", input.name)));
    };
    let delta = head_pose_delta(first, last, template, k)?;
    let (psnr_db, ssim_v) = match (&input.generated, &input.reference) {
        (Some(g), Some(r)) => (Some(Psnr(psnr(g, r)?)), Some(ssim(g, r)?)),
        _ => (None, None),
    };
    Ok(VideoReport {
        name: input.name.clone(),
        intended: input.intended,
        frames: input.landmarks.len(),
        correct: input.intended.map(|m| correctness_label(&delta, m, thresholds)),
        opposite: input.intended.map(|m| correctness_label(&delta, m.opposite(), thresholds)),
        delta,
        psnr_db,
        ssim: ssim_v,
    })
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn percent(flags: impl Iterator<Item = bool>) -> Option<f64> {
    mean(flags.map(|b| if b { 100.0 } else { 0.0 }))
}

/// Evaluates every video in parallel; the first error aborts the report.
pub fn evaluate_all(
    inputs: &[VideoInput],
    template: &LandmarkTemplate3D,
    k: &Intrinsics,
    thresholds: &Thresholds,
) -> Result<EvalReport> {
    thresholds.validate()?;
    let videos = par_map(inputs, |_, v| evaluate_video(v, template, k, thresholds))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let aggregate = Aggregate {
        videos: videos.len(),
        labeled: videos.iter().filter(|v| v.correct.is_some()).count(),
        camera_correctness_pct: percent(videos.iter().filter_map(|v| v.correct)),
        opposite_pct: percent(videos.iter().filter_map(|v| v.opposite)),
        mean_psnr_db: mean(videos.iter().filter_map(|v| v.psnr_db).map(|p| p.0.min(PSNR_CAP_DB))),
        mean_ssim: mean(videos.iter().filter_map(|v| v.ssim)),
    };
    let external = ["lpips", "arcface", "vbench"]
        .into_iter()
        .map(|m| (m.to_string(), "external: not computed".to_string()))
        .collect();
    Ok(EvalReport { thresholds: *thresholds, videos, aggregate, external })
}
