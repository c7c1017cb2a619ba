//! Scene-level effects: structured shadows, specular highlights, elastic
//! distortion, padding, and background compositing.

use super::AugmentError;
use crate::raster::{quantize, quantize1, AlphaMask, Raster};
use crate::rng::RandomSource;

/// Shadow geometry: a half-plane or a convex polygon, in pixel coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum ShadowShape {
    HalfPlane { point: [f64; 2], normal: [f64; 2] },
    /// Convex hull vertices in counter-clockwise order.
    Polygon { hull: Vec<[f64; 2]> },
}

impl ShadowShape {
    /// Signed inside-depth at a point: positive inside the shape, negative
    /// outside, zero on the boundary. For polygons this is the distance to
    /// the nearest edge line (exact inside, approximate near corners).
    fn depth(&self, x: f64, y: f64) -> f64 {
        match self {
            ShadowShape::HalfPlane { point, normal } => {
                normal[0] * (x - point[0]) + normal[1] * (y - point[1])
            }
            ShadowShape::Polygon { hull } => {
                let mut depth = f64::INFINITY;
                for i in 0..hull.len() {
                    let a = hull[i];
                    let b = hull[(i + 1) % hull.len()];
                    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                    let cross = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
                    depth = depth.min(cross / len);
                }
                depth
            }
        }
    }
}

/// Monotone-chain convex hull; returns counter-clockwise vertices.
fn convex_hull(mut points: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    points.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    points.dedup();
    if points.len() < 3 {
        return points;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &points {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in points.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

const POLYGON_ATTEMPTS: u32 = 8;

/// Draws shadow geometry: a coin flip chooses half-plane or convex polygon
/// (3-6 vertices). Degenerate polygons are redrawn up to 8 times before
/// falling back to a half-plane.
pub fn draw_shadow_shape(rng: &mut RandomSource, width: u32, height: u32) -> ShadowShape {
    let w = width as f64;
    let h = height as f64;
    if rng.bernoulli(0.5) {
        for _ in 0..POLYGON_ATTEMPTS {
            let count = rng.uniform_int(3, 6) as usize;
            let points: Vec<[f64; 2]> = (0..count)
                .map(|_| [rng.uniform(0.0, w), rng.uniform(0.0, h)])
                .collect();
            let hull = convex_hull(points);
            if hull.len() >= 3 {
                return ShadowShape::Polygon { hull };
            }
        }
    }
    let point = [rng.uniform(0.0, w), rng.uniform(0.0, h)];
    let angle = rng.uniform(0.0, std::f64::consts::TAU);
    ShadowShape::HalfPlane {
        point,
        normal: [angle.cos(), angle.sin()],
    }
}

/// Multiplies pixels inside the shape by `darken`, feathering the boundary
/// over `softness_px` with a linear ramp on the inside. Pixels outside the
/// shape are untouched.
pub fn apply_shadow_shape(
    r: &Raster,
    shape: &ShadowShape,
    darken: f64,
    softness_px: f64,
) -> Result<Raster, AugmentError> {
    if !(0.3..=0.8).contains(&darken) {
        return Err(AugmentError::InvalidParameter(format!(
            "shadow darken {darken} outside [0.3, 0.8]"
        )));
    }
    if !(0.0..=8.0).contains(&softness_px) {
        return Err(AugmentError::InvalidParameter(format!(
            "shadow softness {softness_px} outside [0, 8]"
        )));
    }
    let mut out = r.clone();
    for y in 0..r.height() {
        for x in 0..r.width() {
            let depth = shape.depth(x as f64, y as f64);
            let coverage = if softness_px > 0.0 {
                (depth / softness_px).clamp(0.0, 1.0)
            } else if depth >= 0.0 {
                1.0
            } else {
                0.0
            };
            if coverage > 0.0 {
                let factor = (1.0 - coverage * (1.0 - darken)) as f32;
                let p = r.get(x, y);
                out.set(
                    x,
                    y,
                    quantize([
                        p[0] as f32 * factor,
                        p[1] as f32 * factor,
                        p[2] as f32 * factor,
                    ]),
                );
            }
        }
    }
    Ok(out)
}

/// Structured shadow with geometry drawn from `rng`.
pub fn apply_structured_shadow(
    r: &Raster,
    rng: &mut RandomSource,
    darken: f64,
    softness_px: f64,
) -> Result<Raster, AugmentError> {
    let shape = draw_shadow_shape(rng, r.width(), r.height());
    apply_shadow_shape(r, &shape, darken, softness_px)
}

/// Adds `count` additive isotropic gaussian blobs with the given sigma and
/// peak to all channels; centers are drawn uniformly over the raster.
pub fn apply_specular_highlight(
    r: &Raster,
    rng: &mut RandomSource,
    count: u32,
    sigma_px: f64,
    peak: f64,
) -> Result<Raster, AugmentError> {
    if !(1..=3).contains(&count) {
        return Err(AugmentError::InvalidParameter(format!(
            "highlight count {count} outside [1, 3]"
        )));
    }
    let sigma_hi = (0.25 * r.width().min(r.height()) as f64).max(2.0);
    if !(2.0..=sigma_hi).contains(&sigma_px) {
        return Err(AugmentError::InvalidParameter(format!(
            "highlight sigma {sigma_px} outside [2, {sigma_hi}]"
        )));
    }
    if !(40.0..=160.0).contains(&peak) {
        return Err(AugmentError::InvalidParameter(format!(
            "highlight peak {peak} outside [40, 160]"
        )));
    }
    let centers: Vec<[f64; 2]> = (0..count)
        .map(|_| {
            [
                rng.uniform(0.0, r.width() as f64),
                rng.uniform(0.0, r.height() as f64),
            ]
        })
        .collect();
    let mut out = r.clone();
    let inv_two_sigma_sq = 1.0 / (2.0 * sigma_px * sigma_px);
    for y in 0..r.height() {
        for x in 0..r.width() {
            let mut add = 0.0f64;
            for c in &centers {
                let d2 = (x as f64 - c[0]).powi(2) + (y as f64 - c[1]).powi(2);
                add += peak * (-d2 * inv_two_sigma_sq).exp();
            }
            if add > 0.0 {
                let p = r.get(x, y);
                out.set(
                    x,
                    y,
                    quantize([
                        p[0] as f32 + add as f32,
                        p[1] as f32 + add as f32,
                        p[2] as f32 + add as f32,
                    ]),
                );
            }
        }
    }
    Ok(out)
}

/// Per-pixel displacement field for elastic distortion.
#[derive(Debug, Clone)]
pub struct DisplacementField {
    width: u32,
    height: u32,
    dx: Vec<f32>,
    dy: Vec<f32>,
}

fn smooth_field(field: &mut [f32], width: usize, height: usize, sigma: f64) {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut kernel: Vec<f32> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp() as f32)
        .collect();
    let sum: f32 = kernel.iter().sum();
    for k in kernel.iter_mut() {
        *k /= sum;
    }
    let mut tmp = vec![0.0f32; field.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (ki, k) in kernel.iter().enumerate() {
                let sx = (x as i64 + ki as i64 - radius).clamp(0, width as i64 - 1) as usize;
                acc += k * field[y * width + sx];
            }
            tmp[y * width + x] = acc;
        }
    }
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (ki, k) in kernel.iter().enumerate() {
                let sy = (y as i64 + ki as i64 - radius).clamp(0, height as i64 - 1) as usize;
                acc += k * tmp[sy * width + x];
            }
            field[y * width + x] = acc;
        }
    }
}

/// Draws a smoothed random displacement field: per-pixel uniform draws in
/// [-1, 1], gaussian-smoothed with std `sigma`, scaled by `alpha`.
pub fn draw_elastic_field(
    rng: &mut RandomSource,
    width: u32,
    height: u32,
    alpha: f64,
    sigma: f64,
) -> Result<DisplacementField, AugmentError> {
    if !(0.0..=40.0).contains(&alpha) {
        return Err(AugmentError::InvalidParameter(format!(
            "elastic alpha {alpha} outside [0, 40]"
        )));
    }
    if !(4.0..=10.0).contains(&sigma) {
        return Err(AugmentError::InvalidParameter(format!(
            "elastic sigma {sigma} outside [4, 10]"
        )));
    }
    let n = width as usize * height as usize;
    let mut dx: Vec<f32> = (0..n).map(|_| rng.uniform(-1.0, 1.0) as f32).collect();
    let mut dy: Vec<f32> = (0..n).map(|_| rng.uniform(-1.0, 1.0) as f32).collect();
    smooth_field(&mut dx, width as usize, height as usize, sigma);
    smooth_field(&mut dy, width as usize, height as usize, sigma);
    for v in dx.iter_mut().chain(dy.iter_mut()) {
        *v *= alpha as f32;
    }
    Ok(DisplacementField {
        width,
        height,
        dx,
        dy,
    })
}

/// Inverse-mapped bilinear sampling through the displacement field, with
/// clamp-to-edge.
pub fn apply_displacement(r: &Raster, field: &DisplacementField) -> Raster {
    assert_eq!((field.width, field.height), (r.width(), r.height()));
    let mut out = r.clone();
    for y in 0..r.height() {
        for x in 0..r.width() {
            let i = y as usize * r.width() as usize + x as usize;
            let sx = x as f32 + field.dx[i];
            let sy = y as f32 + field.dy[i];
            out.set(x, y, quantize(r.sample_bilinear(sx, sy)));
        }
    }
    out
}

pub fn apply_displacement_mask(mask: &AlphaMask, field: &DisplacementField) -> AlphaMask {
    assert_eq!((field.width, field.height), (mask.width(), mask.height()));
    let mut out = mask.clone();
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            let i = y as usize * mask.width() as usize + x as usize;
            let sx = x as f32 + field.dx[i];
            let sy = y as f32 + field.dy[i];
            out.set(x, y, quantize1(mask.sample_bilinear(sx, sy)));
        }
    }
    out
}

/// Elastic distortion: random displacement fields smoothed by a gaussian and
/// scaled by `alpha`.
pub fn apply_elastic(
    r: &Raster,
    rng: &mut RandomSource,
    alpha: f64,
    sigma: f64,
) -> Result<Raster, AugmentError> {
    let field = draw_elastic_field(rng, r.width(), r.height(), alpha, sigma)?;
    Ok(apply_displacement(r, &field))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadFill {
    Color([u8; 3]),
    Replicate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadAmounts {
    pub left: u32,
    pub right: u32,
    pub top: u32,
    pub bottom: u32,
}

/// Draws one pad per side, uniformly from `lo..=hi` pixels.
pub fn draw_pads(rng: &mut RandomSource, lo: u32, hi: u32) -> PadAmounts {
    let mut draw = || rng.uniform_int(lo as i64, hi as i64) as u32;
    PadAmounts {
        left: draw(),
        right: draw(),
        top: draw(),
        bottom: draw(),
    }
}

fn grown_canvas(r: &Raster, pads: &PadAmounts, fill: PadFill) -> Raster {
    let w = r.width() + pads.left + pads.right;
    let h = r.height() + pads.top + pads.bottom;
    let mut big = Raster::new(w, h, [0, 0, 0]).expect("padded canvas is nonempty");
    for y in 0..h {
        for x in 0..w {
            let sx = x as i64 - pads.left as i64;
            let sy = y as i64 - pads.top as i64;
            let inside =
                sx >= 0 && sy >= 0 && sx < r.width() as i64 && sy < r.height() as i64;
            let value = if inside {
                r.get(sx as u32, sy as u32)
            } else {
                match fill {
                    PadFill::Color(c) => c,
                    PadFill::Replicate => r.get(
                        sx.clamp(0, r.width() as i64 - 1) as u32,
                        sy.clamp(0, r.height() as i64 - 1) as u32,
                    ),
                }
            };
            big.set(x, y, value);
        }
    }
    big
}

/// Grows the canvas by the given pads, then resizes back to the original
/// dimensions, shrinking and shifting the content within the frame.
pub fn apply_padding_with(r: &Raster, pads: &PadAmounts, fill: PadFill) -> Raster {
    if pads.left == 0 && pads.right == 0 && pads.top == 0 && pads.bottom == 0 {
        return r.clone();
    }
    grown_canvas(r, pads, fill)
        .resize_bilinear(r.width(), r.height())
        .expect("original dimensions are nonzero")
}

/// Mask counterpart of [`apply_padding_with`]; pads are background (0).
pub fn pad_mask_with(mask: &AlphaMask, pads: &PadAmounts) -> AlphaMask {
    if pads.left == 0 && pads.right == 0 && pads.top == 0 && pads.bottom == 0 {
        return mask.clone();
    }
    let w = mask.width() + pads.left + pads.right;
    let h = mask.height() + pads.top + pads.bottom;
    let mut big = AlphaMask::new(w, h, 0);
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            big.set(x + pads.left, y + pads.top, mask.get(x, y));
        }
    }
    // Resize back with the same center-aligned bilinear rule as rasters.
    let mut out = AlphaMask::new(mask.width(), mask.height(), 0);
    let sx = w as f32 / mask.width() as f32;
    let sy = h as f32 / mask.height() as f32;
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            let src_x = (x as f32 + 0.5) * sx - 0.5;
            let src_y = (y as f32 + 0.5) * sy - 0.5;
            out.set(x, y, quantize1(big.sample_bilinear(src_x, src_y)));
        }
    }
    out
}

/// Padding with per-side amounts drawn from `lo..=hi`, which must lie within
/// `[0, 0.3 * min(w, h)]`.
pub fn apply_padding(
    r: &Raster,
    rng: &mut RandomSource,
    lo: u32,
    hi: u32,
    fill: PadFill,
) -> Result<Raster, AugmentError> {
    let cap = (0.3 * r.width().min(r.height()) as f64).floor() as u32;
    if lo > hi || hi > cap {
        return Err(AugmentError::InvalidParameter(format!(
            "pad range [{lo}, {hi}] outside [0, {cap}]"
        )));
    }
    let pads = draw_pads(rng, lo, hi);
    Ok(apply_padding_with(r, &pads, fill))
}

/// Replaces background pixels (mask coverage 0) with a random crop of a
/// random background resized to the image size; fractional coverage blends
/// linearly.
pub fn apply_background_composite(
    r: &Raster,
    mask: &AlphaMask,
    backgrounds: &[Raster],
    rng: &mut RandomSource,
) -> Result<Raster, AugmentError> {
    if mask.width() != r.width() || mask.height() != r.height() {
        return Err(AugmentError::MaskMismatch {
            mask_w: mask.width(),
            mask_h: mask.height(),
            img_w: r.width(),
            img_h: r.height(),
        });
    }
    if backgrounds.is_empty() {
        return Err(AugmentError::EmptyBackgroundPool);
    }
    let bg = &backgrounds[rng.index(backgrounds.len())];
    let frac = rng.uniform(0.5, 1.0);
    let crop_w = ((bg.width() as f64 * frac).round() as u32).clamp(1, bg.width());
    let crop_h = ((bg.height() as f64 * frac).round() as u32).clamp(1, bg.height());
    let x0 = rng.index((bg.width() - crop_w + 1) as usize) as u32;
    let y0 = rng.index((bg.height() - crop_h + 1) as usize) as u32;
    let mut crop = Raster::new(crop_w, crop_h, [0, 0, 0])?;
    for y in 0..crop_h {
        for x in 0..crop_w {
            crop.set(x, y, bg.get(x0 + x, y0 + y));
        }
    }
    let bg_resized = crop.resize_bilinear(r.width(), r.height())?;
    let mut out = r.clone();
    for y in 0..r.height() {
        for x in 0..r.width() {
            let cov = mask.coverage(x, y);
            if cov < 1.0 {
                let fg = r.get(x, y);
                let bk = bg_resized.get(x, y);
                out.set(
                    x,
                    y,
                    quantize([
                        cov * fg[0] as f32 + (1.0 - cov) * bk[0] as f32,
                        cov * fg[1] as f32 + (1.0 - cov) * bk[1] as f32,
                        cov * fg[2] as f32 + (1.0 - cov) * bk[2] as f32,
                    ]),
                );
            }
        }
    }
    Ok(out)
}
