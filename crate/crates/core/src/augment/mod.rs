//! The probabilistic augmentation pipeline.
//!
//! A [`Pipeline`] is an ordered list of [`Step`]s. When a sample is
//! generated, every step draws a Bernoulli from its own derived stream and,
//! if it fires, draws its parameters uniformly from the configured ranges.
//! Consecutive geometric steps (scale, rotation, shear, perspective) are
//! composed into a single homography and resampled once; a non-geometric
//! step flushes the accumulated matrix first, so configuration order is
//! always respected.
//!
//! Everything is a pure function of `(pipeline, sample seed)`: regenerating
//! a single output in isolation gives byte-identical pixels, regardless of
//! thread count or sibling samples.

pub mod effects;
pub mod filter;
pub mod generate;
pub mod geometry;
pub mod photometric;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::{AlphaMask, Raster, RasterError};
use crate::rng::RandomSource;

pub use effects::{
    apply_background_composite, apply_elastic, apply_padding, apply_specular_highlight,
    apply_structured_shadow, PadFill, ShadowShape,
};
pub use filter::{quality_filter, FilterThresholds, RejectReason, Verdict};
pub use generate::{generate_dataset, GenerationOutcome, GenerationSpec};
pub use geometry::{apply_geometric, GeometricParams, Mat3};
pub use photometric::{
    apply_blur, apply_histogram_normalize, apply_illuminance, apply_morphological, apply_noise,
    MorphOp,
};

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("parameter out of domain: {0}")]
    InvalidParameter(String),
    #[error("background pool is empty")]
    EmptyBackgroundPool,
    #[error("mask {mask_w}x{mask_h} does not match image {img_w}x{img_h}")]
    MaskMismatch {
        mask_w: u32,
        mask_h: u32,
        img_w: u32,
        img_h: u32,
    },
    #[error("no canonical images found for classes: {0:?}")]
    InsufficientCanonicals(Vec<String>),
    #[error(
        "class {class} slot {index} still rejected after {attempts} attempts (last reason: {reason})"
    )]
    RetryExhausted {
        class: String,
        index: u32,
        attempts: u32,
        reason: String,
    },
    #[error("invalid pipeline: {0}")]
    InvalidPipeline(String),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

/// Inclusive `[min, max]` parameter range.
pub type Range = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MorphChoice {
    Erode,
    Dilate,
    #[default]
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PadMode {
    /// Pad with the pipeline fill color.
    #[default]
    Color,
    /// Replicate the edge pixels.
    Replicate,
}

fn zero_range() -> Range {
    [0.0, 0.0]
}

/// Per-kind parameter ranges. Ranges must satisfy `min <= max` and lie within
/// the kind's legal domain (checked by [`Step::validate`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepParams {
    Scale {
        factor: Range,
    },
    Illuminance {
        delta: Range,
        gain: Range,
    },
    StructuredShadow {
        darken: Range,
        softness_px: Range,
    },
    Elastic {
        alpha: Range,
        sigma: Range,
    },
    Rotation {
        angle_deg: Range,
    },
    Morphological {
        #[serde(default)]
        op: MorphChoice,
        radius: [u32; 2],
    },
    Noise {
        sigma: Range,
    },
    SpecularHighlight {
        count: [u32; 2],
        sigma_px: Range,
        peak: Range,
    },
    Blur {
        sigma: Range,
    },
    Padding {
        /// Pad per side as a fraction of min(w, h), within [0, 0.3].
        frac: Range,
        #[serde(default)]
        mode: PadMode,
    },
    Perspective {
        /// Corner offset magnitude as a fraction of min(w, h), within [0, 0.45].
        offset_frac: Range,
    },
    Shear {
        #[serde(default = "zero_range")]
        x: Range,
        #[serde(default = "zero_range")]
        y: Range,
    },
    BackgroundComposite,
    HistogramNormalize,
}

impl StepParams {
    fn kind_name(&self) -> &'static str {
        match self {
            StepParams::Scale { .. } => "scale",
            StepParams::Illuminance { .. } => "illuminance",
            StepParams::StructuredShadow { .. } => "structured_shadow",
            StepParams::Elastic { .. } => "elastic",
            StepParams::Rotation { .. } => "rotation",
            StepParams::Morphological { .. } => "morphological",
            StepParams::Noise { .. } => "noise",
            StepParams::SpecularHighlight { .. } => "specular_highlight",
            StepParams::Blur { .. } => "blur",
            StepParams::Padding { .. } => "padding",
            StepParams::Perspective { .. } => "perspective",
            StepParams::Shear { .. } => "shear",
            StepParams::BackgroundComposite => "background_composite",
            StepParams::HistogramNormalize => "histogram_normalize",
        }
    }
}

/// One pipeline step: a transform kind, its firing probability, and the
/// ranges its parameters are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub probability: f64,
    #[serde(flatten)]
    pub params: StepParams,
}

fn check_range(kind: &str, name: &str, r: Range, domain: [f64; 2]) -> Result<(), AugmentError> {
    if !(r[0] <= r[1]) {
        return Err(AugmentError::InvalidPipeline(format!(
            "{kind}.{name}: range [{}, {}] has min > max",
            r[0], r[1]
        )));
    }
    if r[0] < domain[0] || r[1] > domain[1] {
        return Err(AugmentError::InvalidPipeline(format!(
            "{kind}.{name}: range [{}, {}] outside legal domain [{}, {}]",
            r[0], r[1], domain[0], domain[1]
        )));
    }
    Ok(())
}

impl Step {
    pub fn validate(&self) -> Result<(), AugmentError> {
        let kind = self.params.kind_name();
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(AugmentError::InvalidPipeline(format!(
                "{kind}: probability {} outside [0, 1]",
                self.probability
            )));
        }
        match &self.params {
            StepParams::Scale { factor } => {
                check_range(kind, "factor", *factor, [f64::MIN_POSITIVE, f64::INFINITY])?;
                if !factor[1].is_finite() {
                    return Err(AugmentError::InvalidPipeline(
                        "scale.factor must be finite".into(),
                    ));
                }
            }
            StepParams::Illuminance { delta, gain } => {
                check_range(kind, "delta", *delta, [-100.0, 100.0])?;
                check_range(kind, "gain", *gain, [0.5, 1.8])?;
            }
            StepParams::StructuredShadow { darken, softness_px } => {
                check_range(kind, "darken", *darken, [0.3, 0.8])?;
                check_range(kind, "softness_px", *softness_px, [0.0, 8.0])?;
            }
            StepParams::Elastic { alpha, sigma } => {
                check_range(kind, "alpha", *alpha, [0.0, 40.0])?;
                check_range(kind, "sigma", *sigma, [4.0, 10.0])?;
            }
            StepParams::Rotation { angle_deg } => {
                check_range(kind, "angle_deg", *angle_deg, [-180.0, 180.0])?;
            }
            StepParams::Morphological { radius, .. } => {
                if radius[0] > radius[1] || radius[0] < 1 || radius[1] > 2 {
                    return Err(AugmentError::InvalidPipeline(format!(
                        "morphological.radius [{}, {}] must lie in {{1, 2}}",
                        radius[0], radius[1]
                    )));
                }
            }
            StepParams::Noise { sigma } => check_range(kind, "sigma", *sigma, [0.0, 25.0])?,
            StepParams::SpecularHighlight {
                count,
                sigma_px,
                peak,
            } => {
                if count[0] > count[1] || count[0] < 1 || count[1] > 3 {
                    return Err(AugmentError::InvalidPipeline(format!(
                        "specular_highlight.count [{}, {}] must lie in [1, 3]",
                        count[0], count[1]
                    )));
                }
                check_range(kind, "sigma_px", *sigma_px, [2.0, f64::INFINITY])?;
                check_range(kind, "peak", *peak, [40.0, 160.0])?;
            }
            StepParams::Blur { sigma } => check_range(kind, "sigma", *sigma, [0.5, 3.0])?,
            StepParams::Padding { frac, .. } => check_range(kind, "frac", *frac, [0.0, 0.3])?,
            StepParams::Perspective { offset_frac } => {
                check_range(kind, "offset_frac", *offset_frac, [0.0, 0.45])?;
            }
            StepParams::Shear { x, y } => {
                for (name, r) in [("x", x), ("y", y)] {
                    if !r[0].is_finite() || !r[1].is_finite() || r[0] > r[1] {
                        return Err(AugmentError::InvalidPipeline(format!(
                            "shear.{name}: range [{}, {}] must be finite with min <= max",
                            r[0], r[1]
                        )));
                    }
                }
            }
            StepParams::BackgroundComposite | StepParams::HistogramNormalize => {}
        }
        Ok(())
    }
}

/// Ordered augmentation steps plus everything they share: the master seed,
/// the geometric fill color, and the background pool for compositing.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub steps: Vec<Step>,
    pub master_seed: u64,
    pub fill: [u8; 3],
    pub backgrounds: Vec<Raster>,
}

pub const DEFAULT_FILL: [u8; 3] = [128, 128, 128];

impl Pipeline {
    /// Pipeline with no steps: every sample passes through unchanged.
    pub fn empty(master_seed: u64) -> Self {
        Self {
            steps: Vec::new(),
            master_seed,
            fill: DEFAULT_FILL,
            backgrounds: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        for step in &self.steps {
            step.validate()?;
        }
        let needs_backgrounds = self
            .steps
            .iter()
            .any(|s| matches!(s.params, StepParams::BackgroundComposite));
        if needs_backgrounds && self.backgrounds.is_empty() {
            return Err(AugmentError::EmptyBackgroundPool);
        }
        Ok(())
    }
}

fn draw(rng: &mut RandomSource, range: Range) -> f64 {
    rng.uniform(range[0], range[1])
}

/// Runs the pipeline on one sample. `sample_rng` is the per-sample derived
/// stream; each step derives its own child from it, so skipped steps do not
/// shift the draws of later ones.
pub fn apply_pipeline(
    r: &Raster,
    mask: Option<&AlphaMask>,
    pipeline: &Pipeline,
    sample_rng: &RandomSource,
) -> Result<Raster, AugmentError> {
    let mut img = r.clone();
    let mut mask = mask.cloned();
    let mut pending: Option<Mat3> = None;

    let flush = |img: &mut Raster,
                 mask: &mut Option<AlphaMask>,
                 pending: &mut Option<Mat3>|
     -> Result<(), AugmentError> {
        if let Some(m) = pending.take() {
            *img = geometry::warp_raster(img, &m, pipeline.fill)?;
            if let Some(mk) = mask.as_ref() {
                *mask = Some(geometry::warp_mask(mk, &m)?);
            }
        }
        Ok(())
    };

    for (index, step) in pipeline.steps.iter().enumerate() {
        let mut rng = sample_rng.derive(&format!("step-{index}"));
        if !rng.bernoulli(step.probability) {
            continue;
        }
        let min_dim = img.width().min(img.height());
        let geometric = match &step.params {
            StepParams::Scale { factor } => Some(GeometricParams::Scale {
                factor: draw(&mut rng, *factor),
            }),
            StepParams::Rotation { angle_deg } => Some(GeometricParams::Rotation {
                angle_deg: draw(&mut rng, *angle_deg),
            }),
            StepParams::Shear { x, y } => Some(GeometricParams::Shear {
                x: draw(&mut rng, *x),
                y: draw(&mut rng, *y),
            }),
            StepParams::Perspective { offset_frac } => {
                let reach = draw(&mut rng, *offset_frac) * min_dim as f64;
                let mut offsets = [[0.0; 2]; 4];
                for corner in offsets.iter_mut() {
                    corner[0] = rng.uniform(-reach, reach);
                    corner[1] = rng.uniform(-reach, reach);
                }
                Some(GeometricParams::Perspective { offsets })
            }
            _ => None,
        };

        if let Some(params) = geometric {
            let m = geometry::geometric_matrix(img.width(), img.height(), &params)?;
            pending = Some(match pending {
                Some(prev) => m.mul(&prev),
                None => m,
            });
            continue;
        }

        flush(&mut img, &mut mask, &mut pending)?;
        match &step.params {
            StepParams::Illuminance { delta, gain } => {
                let delta = draw(&mut rng, *delta);
                let gain = draw(&mut rng, *gain);
                img = photometric::apply_illuminance(&img, delta, gain)?;
            }
            StepParams::StructuredShadow { darken, softness_px } => {
                let darken = draw(&mut rng, *darken);
                let softness = draw(&mut rng, *softness_px);
                img = effects::apply_structured_shadow(&img, &mut rng, darken, softness)?;
            }
            StepParams::Elastic { alpha, sigma } => {
                let alpha = draw(&mut rng, *alpha);
                let sigma = draw(&mut rng, *sigma);
                let field =
                    effects::draw_elastic_field(&mut rng, img.width(), img.height(), alpha, sigma)?;
                img = effects::apply_displacement(&img, &field);
                mask = mask.map(|mk| effects::apply_displacement_mask(&mk, &field));
            }
            StepParams::Morphological { op, radius } => {
                let op = match op {
                    MorphChoice::Erode => MorphOp::Erode,
                    MorphChoice::Dilate => MorphOp::Dilate,
                    MorphChoice::Random => {
                        if rng.bernoulli(0.5) {
                            MorphOp::Dilate
                        } else {
                            MorphOp::Erode
                        }
                    }
                };
                let radius = rng.uniform_int(radius[0] as i64, radius[1] as i64) as u32;
                img = photometric::apply_morphological(&img, op, radius)?;
            }
            StepParams::Noise { sigma } => {
                let sigma = draw(&mut rng, *sigma);
                img = photometric::apply_noise(&img, &mut rng, sigma)?;
            }
            StepParams::SpecularHighlight {
                count,
                sigma_px,
                peak,
            } => {
                let count = rng.uniform_int(count[0] as i64, count[1] as i64) as u32;
                let cap = (0.25 * min_dim as f64).max(2.0);
                let sigma = draw(&mut rng, *sigma_px).clamp(2.0, cap);
                let peak = draw(&mut rng, *peak);
                img = effects::apply_specular_highlight(&img, &mut rng, count, sigma, peak)?;
            }
            StepParams::Blur { sigma } => {
                let sigma = draw(&mut rng, *sigma);
                img = photometric::apply_blur(&img, sigma)?;
            }
            StepParams::Padding { frac, mode } => {
                let cap = (0.3 * min_dim as f64).floor() as u32;
                let lo = ((frac[0] * min_dim as f64).round() as u32).min(cap);
                let hi = ((frac[1] * min_dim as f64).round() as u32).clamp(lo, cap);
                let pads = effects::draw_pads(&mut rng, lo, hi);
                let fill = match mode {
                    PadMode::Color => PadFill::Color(pipeline.fill),
                    PadMode::Replicate => PadFill::Replicate,
                };
                img = effects::apply_padding_with(&img, &pads, fill);
                mask = mask.map(|mk| effects::pad_mask_with(&mk, &pads));
            }
            StepParams::BackgroundComposite => match mask.as_ref() {
                Some(mk) => {
                    img = effects::apply_background_composite(
                        &img,
                        mk,
                        &pipeline.backgrounds,
                        &mut rng,
                    )?;
                }
                None => {
                    log::warn!("background_composite skipped: sample has no alpha mask");
                }
            },
            StepParams::HistogramNormalize => {
                img = photometric::apply_histogram_normalize(&img);
            }
            StepParams::Scale { .. }
            | StepParams::Rotation { .. }
            | StepParams::Shear { .. }
            | StepParams::Perspective { .. } => unreachable!("handled as geometric"),
        }
    }

    flush(&mut img, &mut mask, &mut pending)?;
    Ok(img)
}
