//! Photometric transforms: illuminance, gaussian noise, gaussian blur,
//! percentile histogram normalization, and morphological operators.

use super::AugmentError;
use crate::raster::{quantize1, Raster};
use crate::rng::RandomSource;

/// Contrast-and-brightness adjustment pivoting on mid-gray:
/// `v' = clamp(gain * (v - 128) + 128 + delta)`, applied uniformly to all
/// channels.
pub fn apply_illuminance(r: &Raster, delta: f64, gain: f64) -> Result<Raster, AugmentError> {
    if !(-100.0..=100.0).contains(&delta) {
        return Err(AugmentError::InvalidParameter(format!(
            "brightness delta {delta} outside [-100, 100]"
        )));
    }
    if !(0.5..=1.8).contains(&gain) {
        return Err(AugmentError::InvalidParameter(format!(
            "contrast gain {gain} outside [0.5, 1.8]"
        )));
    }
    let mut out = r.clone();
    for v in out.pixels_mut() {
        *v = quantize1((gain as f32) * (*v as f32 - 128.0) + 128.0 + delta as f32);
    }
    Ok(out)
}

/// Additive gaussian noise per pixel and channel, clamped on write-back.
pub fn apply_noise(r: &Raster, rng: &mut RandomSource, sigma: f64) -> Result<Raster, AugmentError> {
    if !(0.0..=25.0).contains(&sigma) {
        return Err(AugmentError::InvalidParameter(format!(
            "noise sigma {sigma} outside [0, 25]"
        )));
    }
    let mut out = r.clone();
    for v in out.pixels_mut() {
        *v = quantize1(*v as f32 + (sigma * rng.gaussian()) as f32);
    }
    Ok(out)
}

fn gaussian_kernel(sigma: f64) -> Vec<f32> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut kernel: Vec<f32> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp() as f32)
        .collect();
    let sum: f32 = kernel.iter().sum();
    for k in kernel.iter_mut() {
        *k /= sum;
    }
    kernel
}

/// Separable gaussian blur, kernel radius `ceil(3 sigma)`, edge clamp.
/// The kernel is normalized, so constant images are fixed points.
pub fn apply_blur(r: &Raster, sigma: f64) -> Result<Raster, AugmentError> {
    if !(0.5..=3.0).contains(&sigma) {
        return Err(AugmentError::InvalidParameter(format!(
            "blur sigma {sigma} outside [0.5, 3]"
        )));
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as i64;
    let (w, h) = (r.width() as i64, r.height() as i64);

    // Horizontal pass into a float plane, then vertical pass with one
    // quantization at the end.
    let mut mid = vec![0.0f32; (w * h) as usize * 3];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0f32; 3];
            for (ki, k) in kernel.iter().enumerate() {
                let sx = (x + ki as i64 - radius).clamp(0, w - 1);
                let p = r.get(sx as u32, y as u32);
                for c in 0..3 {
                    acc[c] += k * p[c] as f32;
                }
            }
            let i = ((y * w + x) * 3) as usize;
            mid[i..i + 3].copy_from_slice(&acc);
        }
    }
    let mut out = r.clone();
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0f32; 3];
            for (ki, k) in kernel.iter().enumerate() {
                let sy = (y + ki as i64 - radius).clamp(0, h - 1);
                let i = ((sy * w + x) * 3) as usize;
                for c in 0..3 {
                    acc[c] += k * mid[i + c];
                }
            }
            out.set(
                x as u32,
                y as u32,
                [quantize1(acc[0]), quantize1(acc[1]), quantize1(acc[2])],
            );
        }
    }
    Ok(out)
}

/// Nearest-rank percentile of an unsorted luma buffer (consumed by sorting).
fn percentile(sorted: &[f32], q: f64) -> f32 {
    let idx = (q * (sorted.len() - 1) as f64).round() as usize;
    sorted[idx]
}

/// Linear stretch mapping the 1st/99th luminance percentiles to 0/255; the
/// same affine map is applied to all channels. Constant images (and any image
/// whose percentiles coincide) are returned unchanged.
pub fn apply_histogram_normalize(r: &Raster) -> Raster {
    let mut lumas: Vec<f32> = (0..r.height())
        .flat_map(|y| (0..r.width()).map(move |x| (x, y)))
        .map(|(x, y)| r.luma(x, y))
        .collect();
    lumas.sort_by(f32::total_cmp);
    let lo = percentile(&lumas, 0.01);
    let hi = percentile(&lumas, 0.99);
    if hi <= lo {
        return r.clone();
    }
    let gain = 255.0 / (hi - lo);
    let mut out = r.clone();
    for v in out.pixels_mut() {
        *v = quantize1((*v as f32 - lo) * gain);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphOp {
    Erode,
    Dilate,
}

/// Per-channel min (erode) or max (dilate) over a `(2r+1)^2` window, with the
/// window clipped at the borders.
pub fn apply_morphological(r: &Raster, op: MorphOp, radius: u32) -> Result<Raster, AugmentError> {
    if !(1..=2).contains(&radius) {
        return Err(AugmentError::InvalidParameter(format!(
            "morphological radius {radius} must be 1 or 2"
        )));
    }
    let (w, h) = (r.width() as i64, r.height() as i64);
    let rad = radius as i64;
    let mut out = r.clone();
    for y in 0..h {
        for x in 0..w {
            let mut acc = match op {
                MorphOp::Erode => [u8::MAX; 3],
                MorphOp::Dilate => [u8::MIN; 3],
            };
            for wy in (y - rad).max(0)..=(y + rad).min(h - 1) {
                for wx in (x - rad).max(0)..=(x + rad).min(w - 1) {
                    let p = r.get(wx as u32, wy as u32);
                    for c in 0..3 {
                        acc[c] = match op {
                            MorphOp::Erode => acc[c].min(p[c]),
                            MorphOp::Dilate => acc[c].max(p[c]),
                        };
                    }
                }
            }
            out.set(x as u32, y as u32, acc);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn illuminance_identity_and_pivot() {
        let r = Raster::new(4, 4, [128, 128, 128]).unwrap();
        assert_eq!(apply_illuminance(&r, 0.0, 1.0).unwrap(), r);
        // 128 is the contrast pivot: any legal gain leaves it in place.
        assert_eq!(apply_illuminance(&r, 0.0, 1.5).unwrap(), r);
    }

    #[test]
    fn illuminance_hand_computed_value() {
        let r = Raster::new(1, 1, [200, 200, 200]).unwrap();
        let out = apply_illuminance(&r, 10.0, 1.5).unwrap();
        // 1.5 * (200 - 128) + 128 + 10 = 246
        assert_eq!(out.get(0, 0), [246, 246, 246]);
    }

    #[test]
    fn illuminance_rejects_out_of_domain_gain() {
        let r = Raster::new(1, 1, [0; 3]).unwrap();
        assert!(apply_illuminance(&r, 0.0, 2.0).is_err());
        assert!(apply_illuminance(&r, 150.0, 1.0).is_err());
    }

    #[test]
    fn noise_sigma_zero_is_identity() {
        let r = Raster::new(8, 8, [77, 10, 240]).unwrap();
        let mut rng = RandomSource::from_seed(1);
        assert_eq!(apply_noise(&r, &mut rng, 0.0).unwrap(), r);
    }

    #[test]
    fn noise_statistics_match_sigma() {
        let r = Raster::new(256, 256, [128, 128, 128]).unwrap();
        let mut rng = RandomSource::from_seed(20);
        let out = apply_noise(&r, &mut rng, 15.0).unwrap();
        let diffs: Vec<f64> = out
            .pixels()
            .iter()
            .zip(r.pixels())
            .map(|(&a, &b)| a as f64 - b as f64)
            .collect();
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let std = (diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n).sqrt();
        assert!(mean.abs() <= 0.5, "noise mean {mean}");
        assert!((std - 15.0).abs() <= 1.5, "noise std {std}");
    }

    #[test]
    fn blur_keeps_constant_images_constant() {
        let r = Raster::new(10, 6, [3, 180, 250]).unwrap();
        assert_eq!(apply_blur(&r, 2.0).unwrap(), r);
    }

    #[test]
    fn blur_impulse_matches_sampled_kernel() {
        let mut r = Raster::new(15, 15, [0, 0, 0]).unwrap();
        r.set(7, 7, [255, 255, 255]);
        let out = apply_blur(&r, 1.0).unwrap();
        let kernel = gaussian_kernel(1.0);
        let radius = kernel.len() as i64 / 2;
        for y in 0..15i64 {
            for x in 0..15i64 {
                let (dx, dy) = (x - 7, y - 7);
                let expect = if dx.abs() <= radius && dy.abs() <= radius {
                    255.0 * kernel[(dx + radius) as usize] * kernel[(dy + radius) as usize]
                } else {
                    0.0
                };
                let got = out.get(x as u32, y as u32)[0] as f32;
                assert!(
                    (got - expect).abs() <= 1.0,
                    "pixel ({x},{y}): got {got}, expected {expect}"
                );
            }
        }
    }

    #[test]
    fn blur_preserves_total_brightness_of_interior_impulse() {
        let mut r = Raster::new(21, 21, [0, 0, 0]).unwrap();
        r.set(10, 10, [255, 255, 255]);
        let out = apply_blur(&r, 2.0).unwrap();
        let sum: i64 = out.pixels().iter().step_by(3).map(|&v| v as i64).sum();
        let window = (2 * (3.0f64 * 2.0).ceil() as i64 + 1).pow(2);
        assert!(
            (sum - 255).abs() <= window / 2,
            "brightness sum {sum} deviates from 255"
        );
    }

    #[test]
    fn histogram_normalize_stretches_two_level_image() {
        let mut r = Raster::new(10, 10, [50, 50, 50]).unwrap();
        for x in 0..10 {
            for y in 5..10 {
                r.set(x, y, [200, 200, 200]);
            }
        }
        let out = apply_histogram_normalize(&r);
        assert_eq!(out.get(0, 0), [0, 0, 0]);
        assert_eq!(out.get(0, 9), [255, 255, 255]);
    }

    #[test]
    fn histogram_normalize_leaves_constant_images() {
        let r = Raster::new(5, 5, [90, 90, 90]).unwrap();
        assert_eq!(apply_histogram_normalize(&r), r);
    }

    #[test]
    fn histogram_normalize_is_idempotent_within_one_level() {
        // Grayscale gradient: the percentile anchors land exactly on 0/255
        // after one pass, so a second pass moves nothing by more than one
        // level.
        let mut r = Raster::new(16, 16, [0, 0, 0]).unwrap();
        for y in 0..16 {
            for x in 0..16 {
                let v = (40 + x * 9 + y * 3) as u8;
                r.set(x, y, [v, v, v]);
            }
        }
        let once = apply_histogram_normalize(&r);
        let twice = apply_histogram_normalize(&once);
        for (a, b) in once.pixels().iter().zip(twice.pixels()) {
            assert!((*a as i32 - *b as i32).abs() <= 1);
        }
    }

    #[test]
    fn morphology_constant_invariance() {
        let r = Raster::new(6, 6, [120, 7, 99]).unwrap();
        assert_eq!(apply_morphological(&r, MorphOp::Erode, 1).unwrap(), r);
        assert_eq!(apply_morphological(&r, MorphOp::Dilate, 2).unwrap(), r);
    }

    #[test]
    fn dilate_grows_single_dark_pixel_inverse() {
        // Single black pixel in white: dilating darkness means eroding the
        // image; a windowed-min spreads the black into a 3x3 block.
        let mut r = Raster::new(5, 5, [255, 255, 255]).unwrap();
        r.set(2, 2, [0, 0, 0]);
        let out = apply_morphological(&r, MorphOp::Erode, 1).unwrap();
        for y in 0..5 {
            for x in 0..5 {
                let inside = (1..=3).contains(&x) && (1..=3).contains(&y);
                let expect = if inside { [0, 0, 0] } else { [255, 255, 255] };
                assert_eq!(out.get(x, y), expect, "at ({x},{y})");
            }
        }
    }

    #[test]
    fn closing_dominates_original_for_binary_images() {
        // erode(dilate(r)) >= r pointwise, checked by brute force.
        let mut r = Raster::new(7, 7, [0, 0, 0]).unwrap();
        for (x, y) in [(1, 1), (2, 1), (5, 4), (3, 3), (6, 6), (0, 5)] {
            r.set(x, y, [255, 255, 255]);
        }
        let closed =
            apply_morphological(&apply_morphological(&r, MorphOp::Dilate, 1).unwrap(), MorphOp::Erode, 1)
                .unwrap();
        for (c, o) in closed.pixels().iter().zip(r.pixels()) {
            assert!(c >= o);
        }
    }

    #[test]
    fn morphology_rejects_bad_radius() {
        let r = Raster::new(3, 3, [0; 3]).unwrap();
        assert!(apply_morphological(&r, MorphOp::Erode, 0).is_err());
        assert!(apply_morphological(&r, MorphOp::Dilate, 3).is_err());
    }
}
