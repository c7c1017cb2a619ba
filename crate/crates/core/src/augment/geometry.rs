//! Homography construction and inverse-mapped warping.
//!
//! Scale, rotation, shear, and perspective all reduce to a single 3x3
//! homography applied by inverse mapping with bilinear sampling, so a chain
//! of geometric steps costs one resample. Rotation, scale, and shear pivot on
//! the image center; perspective is defined by four destination corner
//! offsets. Pixels that map outside the source take the fill color.

use super::AugmentError;
use crate::raster::{quantize, AlphaMask, Raster};

/// Row-major 3x3 matrix acting on homogeneous pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [f64; 9]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);

    /// `self * other`: applies `other` first, then `self`.
    pub fn mul(&self, other: &Mat3) -> Mat3 {
        let a = &self.0;
        let b = &other.0;
        let mut out = [0.0; 9];
        for row in 0..3 {
            for col in 0..3 {
                out[row * 3 + col] = (0..3).map(|k| a[row * 3 + k] * b[k * 3 + col]).sum();
            }
        }
        Mat3(out)
    }

    pub fn inverse(&self) -> Option<Mat3> {
        let m = &self.0;
        let cof = [
            m[4] * m[8] - m[5] * m[7],
            m[2] * m[7] - m[1] * m[8],
            m[1] * m[5] - m[2] * m[4],
            m[5] * m[6] - m[3] * m[8],
            m[0] * m[8] - m[2] * m[6],
            m[2] * m[3] - m[0] * m[5],
            m[3] * m[7] - m[4] * m[6],
            m[1] * m[6] - m[0] * m[7],
            m[0] * m[4] - m[1] * m[3],
        ];
        let det = m[0] * cof[0] + m[1] * cof[3] + m[2] * cof[6];
        if det.abs() < 1e-12 {
            return None;
        }
        Some(Mat3(cof.map(|c| c / det)))
    }

    /// Projective application to a point.
    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let m = &self.0;
        let w = m[6] * x + m[7] * y + m[8];
        (
            (m[0] * x + m[1] * y + m[2]) / w,
            (m[3] * x + m[4] * y + m[5]) / w,
        )
    }

    fn translation(tx: f64, ty: f64) -> Mat3 {
        Mat3([1.0, 0.0, tx, 0.0, 1.0, ty, 0.0, 0.0, 1.0])
    }

    fn about_center(width: u32, height: u32, core: Mat3) -> Mat3 {
        let cx = (width as f64 - 1.0) / 2.0;
        let cy = (height as f64 - 1.0) / 2.0;
        Mat3::translation(cx, cy)
            .mul(&core)
            .mul(&Mat3::translation(-cx, -cy))
    }
}

/// One geometric transform with its drawn parameter values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometricParams {
    Scale { factor: f64 },
    Rotation { angle_deg: f64 },
    Shear { x: f64, y: f64 },
    /// Destination offsets of the four image corners, in pixels, ordered
    /// top-left, top-right, bottom-right, bottom-left.
    Perspective { offsets: [[f64; 2]; 4] },
}

/// Forward homography for the transform on a canvas of the given size.
/// Validates the drawn values against each kind's legal domain.
pub fn geometric_matrix(
    width: u32,
    height: u32,
    params: &GeometricParams,
) -> Result<Mat3, AugmentError> {
    match *params {
        GeometricParams::Scale { factor } => {
            if !(factor.is_finite() && factor > 0.0) {
                return Err(AugmentError::InvalidParameter(format!(
                    "scale factor {factor} must be positive"
                )));
            }
            Ok(Mat3::about_center(
                width,
                height,
                Mat3([factor, 0.0, 0.0, 0.0, factor, 0.0, 0.0, 0.0, 1.0]),
            ))
        }
        GeometricParams::Rotation { angle_deg } => {
            if !(-180.0..=180.0).contains(&angle_deg) {
                return Err(AugmentError::InvalidParameter(format!(
                    "rotation angle {angle_deg} outside [-180, 180]"
                )));
            }
            let (s, c) = angle_deg.to_radians().sin_cos();
            Ok(Mat3::about_center(
                width,
                height,
                Mat3([c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]),
            ))
        }
        GeometricParams::Shear { x, y } => {
            if !x.is_finite() || !y.is_finite() {
                return Err(AugmentError::InvalidParameter(
                    "shear factor must be finite".into(),
                ));
            }
            Ok(Mat3::about_center(
                width,
                height,
                Mat3([1.0, x, 0.0, y, 1.0, 0.0, 0.0, 0.0, 1.0]),
            ))
        }
        GeometricParams::Perspective { offsets } => {
            let bound = 0.45 * width.min(height) as f64;
            for [dx, dy] in offsets {
                if dx.abs() > bound || dy.abs() > bound {
                    return Err(AugmentError::InvalidParameter(format!(
                        "corner offset ({dx}, {dy}) exceeds 0.45 x min(w, h) = {bound}"
                    )));
                }
            }
            let w = width as f64;
            let h = height as f64;
            let src = [[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]];
            let dst = [
                [src[0][0] + offsets[0][0], src[0][1] + offsets[0][1]],
                [src[1][0] + offsets[1][0], src[1][1] + offsets[1][1]],
                [src[2][0] + offsets[2][0], src[2][1] + offsets[2][1]],
                [src[3][0] + offsets[3][0], src[3][1] + offsets[3][1]],
            ];
            homography_from_points(&src, &dst).ok_or_else(|| {
                AugmentError::InvalidParameter("degenerate perspective quad".into())
            })
        }
    }
}

/// Direct linear solve for the homography mapping `src[k]` to `dst[k]`.
pub fn homography_from_points(src: &[[f64; 2]; 4], dst: &[[f64; 2]; 4]) -> Option<Mat3> {
    // Unknowns [a, b, c, d, e, f, g, h] with i fixed at 1.
    let mut a = [[0.0f64; 9]; 8];
    for k in 0..4 {
        let [x, y] = src[k];
        let [u, v] = dst[k];
        a[2 * k] = [x, y, 1.0, 0.0, 0.0, 0.0, -x * u, -y * u, u];
        a[2 * k + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -x * v, -y * v, v];
    }
    // Gaussian elimination with partial pivoting on the augmented system.
    for col in 0..8 {
        let pivot = (col..8).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, pivot);
        let div = a[col][col];
        for entry in a[col].iter_mut() {
            *entry /= div;
        }
        for row in 0..8 {
            if row != col {
                let factor = a[row][col];
                for c in 0..9 {
                    a[row][c] -= factor * a[col][c];
                }
            }
        }
    }
    Some(Mat3([
        a[0][8], a[1][8], a[2][8], a[3][8], a[4][8], a[5][8], a[6][8], a[7][8], 1.0,
    ]))
}

/// Tolerance on the in-source test, so rotations by exact multiples of 90
/// degrees (whose matrices carry ~1e-16 trigonometric residue) still sample
/// the border pixels instead of falling into fill.
const BORDER_EPS: f64 = 1e-6;

/// Warps a raster through the forward homography by inverse mapping with
/// bilinear sampling. Output canvas equals the input canvas; destination
/// pixels whose source falls outside the image take `fill`.
pub fn warp_raster(r: &Raster, forward: &Mat3, fill: [u8; 3]) -> Result<Raster, AugmentError> {
    let inverse = forward
        .inverse()
        .ok_or_else(|| AugmentError::InvalidParameter("non-invertible homography".into()))?;
    let (w, h) = (r.width(), r.height());
    let mut out = Raster::new(w, h, fill)?;
    let max_x = (w - 1) as f64;
    let max_y = (h - 1) as f64;
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = inverse.apply(x as f64, y as f64);
            if sx >= -BORDER_EPS
                && sx <= max_x + BORDER_EPS
                && sy >= -BORDER_EPS
                && sy <= max_y + BORDER_EPS
            {
                out.set(x, y, quantize(r.sample_bilinear(sx as f32, sy as f32)));
            }
        }
    }
    Ok(out)
}

/// Mask counterpart of [`warp_raster`]; out-of-source coverage is 0.
pub fn warp_mask(mask: &AlphaMask, forward: &Mat3) -> Result<AlphaMask, AugmentError> {
    let inverse = forward
        .inverse()
        .ok_or_else(|| AugmentError::InvalidParameter("non-invertible homography".into()))?;
    let (w, h) = (mask.width(), mask.height());
    let mut out = AlphaMask::new(w, h, 0);
    let max_x = (w - 1) as f64;
    let max_y = (h - 1) as f64;
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = inverse.apply(x as f64, y as f64);
            if sx >= -BORDER_EPS
                && sx <= max_x + BORDER_EPS
                && sy >= -BORDER_EPS
                && sy <= max_y + BORDER_EPS
            {
                let v = mask.sample_bilinear(sx as f32, sy as f32);
                out.set(x, y, v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    Ok(out)
}

/// Applies a single geometric transform as one homography warp.
pub fn apply_geometric(
    r: &Raster,
    params: &GeometricParams,
    fill: [u8; 3],
) -> Result<Raster, AugmentError> {
    let m = geometric_matrix(r.width(), r.height(), params)?;
    warp_raster(r, &m, fill)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_transforms_are_exact() {
        let mut r = Raster::new(7, 5, [10, 20, 30]).unwrap();
        r.set(3, 2, [200, 5, 90]);
        r.set(6, 4, [1, 2, 3]);
        for params in [
            GeometricParams::Rotation { angle_deg: 0.0 },
            GeometricParams::Scale { factor: 1.0 },
            GeometricParams::Shear { x: 0.0, y: 0.0 },
            GeometricParams::Perspective {
                offsets: [[0.0, 0.0]; 4],
            },
        ] {
            assert_eq!(apply_geometric(&r, &params, [0, 0, 0]).unwrap(), r);
        }
    }

    #[test]
    fn rotation_90_moves_corner_pixel() {
        // Hand-applied homography: (0,0) about center (1,1) under a 90-degree
        // rotation lands on (2,0).
        let mut r = Raster::new(3, 3, [255, 255, 255]).unwrap();
        r.set(0, 0, [255, 0, 0]);
        let out = apply_geometric(
            &r,
            &GeometricParams::Rotation { angle_deg: 90.0 },
            [0, 0, 0],
        )
        .unwrap();
        assert_eq!(out.get(2, 0), [255, 0, 0]);
        assert_eq!(out.get(0, 0), [255, 255, 255]);
        assert_eq!(out.get(1, 1), [255, 255, 255]);
    }

    #[test]
    fn downscale_keeps_uniform_raster_uniform() {
        let r = Raster::new(8, 8, [70, 80, 90]).unwrap();
        let out = apply_geometric(
            &r,
            &GeometricParams::Scale { factor: 0.5 },
            [70, 80, 90],
        )
        .unwrap();
        assert_eq!(out, r);
    }

    #[test]
    fn upscale_fills_nothing_on_same_canvas() {
        // Scale 2 about center: canvas unchanged, no fill pixels can appear.
        let r = Raster::new(9, 9, [50, 60, 70]).unwrap();
        let out =
            apply_geometric(&r, &GeometricParams::Scale { factor: 2.0 }, [0, 0, 0]).unwrap();
        assert_eq!((out.width(), out.height()), (9, 9));
        assert!(out.pixels().chunks(3).all(|p| p == [50, 60, 70]));
    }

    #[test]
    fn out_of_domain_parameters_are_rejected() {
        let r = Raster::new(4, 4, [0; 3]).unwrap();
        assert!(apply_geometric(&r, &GeometricParams::Scale { factor: 0.0 }, [0; 3]).is_err());
        assert!(apply_geometric(
            &r,
            &GeometricParams::Rotation { angle_deg: 181.0 },
            [0; 3]
        )
        .is_err());
        assert!(apply_geometric(
            &r,
            &GeometricParams::Perspective {
                offsets: [[3.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
            },
            [0; 3]
        )
        .is_err());
    }

    #[test]
    fn homography_maps_control_points() {
        let src = [[0.0, 0.0], [10.0, 0.0], [10.0, 8.0], [0.0, 8.0]];
        let dst = [[1.0, 0.5], [9.0, 1.0], [10.5, 7.0], [-0.5, 8.5]];
        let m = homography_from_points(&src, &dst).unwrap();
        for k in 0..4 {
            let (u, v) = m.apply(src[k][0], src[k][1]);
            assert!((u - dst[k][0]).abs() < 1e-9);
            assert!((v - dst[k][1]).abs() < 1e-9);
        }
    }

    #[test]
    fn inverse_round_trips() {
        let m = geometric_matrix(20, 20, &GeometricParams::Rotation { angle_deg: 33.0 }).unwrap();
        let id = m.mul(&m.inverse().unwrap());
        for (i, v) in id.0.iter().enumerate() {
            let expect = if i % 4 == 0 { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-12);
        }
    }
}
