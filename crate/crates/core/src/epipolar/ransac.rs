use serde::{Deserialize, Serialize};

use super::fundamental::{estimate_fundamental_8pt, sampson_distance};
use super::{Correspondence, FundamentalMatrix};
use crate::error::{Error, Result};
use crate::rng::{keyed, sample_distinct};

const SAMPLE_SIZE: usize = 8;
const REFIT_ROUNDS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RansacConfig {
    pub threshold_px: f64,
    pub max_iters: usize,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        RansacConfig {
            threshold_px: 1.0,
            max_iters: 2000,
            confidence: 0.999,
            seed: 0,
        }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_px > 0.0) {
            return Err(Error::Config(format!("threshold_px {} must be positive", self.threshold_px)));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::Config(format!("confidence {} outside (0, 1)", self.confidence)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RansacOutcome {
    pub fundamental: FundamentalMatrix,
    pub inliers: Vec<bool>,
    pub iterations: usize,
}

impl RansacOutcome {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|&&b| b).count()
    }
}

fn classify(f: &FundamentalMatrix, corrs: &[Correspondence], threshold: f64) -> (Vec<bool>, f64) {
    let mut cost = 0.0;
    let mask = corrs
        .iter()
        .map(|c| {
            let d = sampson_distance(f, c);
            let inlier = d < threshold;
            if inlier {
                cost += d;
            }
            inlier
        })
        .collect();
    (mask, cost)
}

fn required_iterations(inlier_ratio: f64, confidence: f64) -> usize {
    let good = inlier_ratio.powi(SAMPLE_SIZE as i32);
    if good >= 1.0 {
        return 1;
    }
    if good <= 0.0 {
        return usize::MAX;
    }
    let n = (1.0 - confidence).ln() / (1.0 - good).ln();
    if n.is_finite() {
        n.ceil().max(1.0) as usize
    } else {
        usize::MAX
    }
}

/// Robust fundamental-matrix fit. Minimal samples are solved with the
/// eight-point method and scored by inlier count (Sampson distance below the
/// threshold); the winner is refit on all of its inliers.
pub fn ransac_fundamental(corrs: &[Correspondence], cfg: &RansacConfig) -> Result<RansacOutcome> {
    cfg.validate()?;
    if corrs.len() < SAMPLE_SIZE {
        return Err(Error::InsufficientPoints {
            needed: SAMPLE_SIZE,
            got: corrs.len(),
        });
    }
    let mut rng = keyed(cfg.seed, "ransac_fundamental", 0);
    let mut best: Option<(usize, f64, FundamentalMatrix)> = None;
    let mut needed = cfg.max_iters;
    let mut iterations = 0;
    let mut sample = Vec::with_capacity(SAMPLE_SIZE);
    while iterations < needed.min(cfg.max_iters) {
        iterations += 1;
        sample.clear();
        sample.extend(
            sample_distinct(&mut rng, corrs.len(), SAMPLE_SIZE)
                .into_iter()
                .map(|i| corrs[i]),
        );
        let Ok(f) = estimate_fundamental_8pt(&sample) else {
            continue;
        };
        let (mask, cost) = classify(&f, corrs, cfg.threshold_px);
        let count = mask.iter().filter(|&&b| b).count();
        let better = match &best {
            None => true,
            Some((c, k, _)) => count > *c || (count == *c && cost < *k),
        };
        if better {
            best = Some((count, cost, f));
            needed = required_iterations(count as f64 / corrs.len() as f64, cfg.confidence);
        }
    }
    let Some((count, _, mut f)) = best else {
        return Err(Error::InsufficientInliers { inliers: 0, needed: SAMPLE_SIZE });
    };
    if count < SAMPLE_SIZE {
        return Err(Error::InsufficientInliers { inliers: count, needed: SAMPLE_SIZE });
    }
    let (mut mask, _) = classify(&f, corrs, cfg.threshold_px);
    for _ in 0..REFIT_ROUNDS {
        let inliers: Vec<Correspondence> = corrs
            .iter()
            .zip(&mask)
            .filter(|(_, &m)| m)
            .map(|(c, _)| *c)
            .collect();
        if inliers.len() < SAMPLE_SIZE {
            break;
        }
        let Ok(refit) = estimate_fundamental_8pt(&inliers) else {
            break;
        };
        let (next, _) = classify(&refit, corrs, cfg.threshold_px);
        if next.iter().filter(|&&b| b).count() < SAMPLE_SIZE {
            break;
        }
        let same = next == mask;
        f = refit;
        mask = next;
        if same {
            break;
        }
    }
    let final_count = mask.iter().filter(|&&b| b).count();
    if final_count < SAMPLE_SIZE {
        return Err(Error::InsufficientInliers { inliers: final_count, needed: SAMPLE_SIZE });
    }
    Ok(RansacOutcome {
        fundamental: f,
        inliers: mask,
        iterations,
    })
}
