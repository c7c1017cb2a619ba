//! Shallow quality filter applied to every generated sample before it is
//! admitted to a dataset.

use serde::{Deserialize, Serialize};

use crate::raster::Raster;

/// Rejection thresholds. Defaults match the documented filter rules; all are
/// overridable in configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterThresholds {
    pub min_mean_luma: f32,
    pub max_mean_luma: f32,
    pub min_luma_std: f32,
    /// Maximum fraction of pixels exactly equal to the geometric fill color.
    pub max_fill_fraction: f32,
}

impl Default for FilterThresholds {
    fn default() -> Self {
        Self {
            min_mean_luma: 15.0,
            max_mean_luma: 240.0,
            min_luma_std: 5.0,
            max_fill_fraction: 0.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    TooDark,
    TooBright,
    LowVariance,
    FillDominated,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RejectReason::TooDark => "too dark",
            RejectReason::TooBright => "too bright",
            RejectReason::LowVariance => "low variance",
            RejectReason::FillDominated => "fill dominated",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

/// Accepts or rejects a generated sample. `fill` is the geometric fill color
/// of the pipeline that produced it.
pub fn quality_filter(r: &Raster, thresholds: &FilterThresholds, fill: [u8; 3]) -> Verdict {
    let n = (r.width() as usize * r.height() as usize) as f64;
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    let mut fill_count = 0usize;
    for y in 0..r.height() {
        for x in 0..r.width() {
            let luma = r.luma(x, y) as f64;
            sum += luma;
            sum_sq += luma * luma;
            if r.get(x, y) == fill {
                fill_count += 1;
            }
        }
    }
    let mean = sum / n;
    let std = (sum_sq / n - mean * mean).max(0.0).sqrt();
    if mean < thresholds.min_mean_luma as f64 {
        Verdict::Reject(RejectReason::TooDark)
    } else if mean > thresholds.max_mean_luma as f64 {
        Verdict::Reject(RejectReason::TooBright)
    } else if std < thresholds.min_luma_std as f64 {
        Verdict::Reject(RejectReason::LowVariance)
    } else if fill_count as f64 / n > thresholds.max_fill_fraction as f64 {
        Verdict::Reject(RejectReason::FillDominated)
    } else {
        Verdict::Accept
    }
}
