//! Grayscale raster images: PGM/PPM file I/O and the center rotation
//! transform used to generate rotated test inputs and to turn images
//! during matching.
//!
//! Pixels are stored as `f64` so that interpolation and gradient
//! estimation keep sub-integer precision; file I/O quantizes with
//! round-half-up.

mod pnm;

pub use pnm::{load_image, save_image, save_image_ascii};

use crate::error::{Error, Result};

/// A grayscale raster in screen coordinates (x right, y down), row-major,
/// nominal intensity range `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "zero-dimension image ({width}x{height})"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "pixel buffer length {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        GrayImage::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.pixels[y * self.width + x] = value;
    }

    /// Geometric pixel-grid center `((w-1)/2, (h-1)/2)`. With this
    /// convention a 180-degree rotation is an exact pixel permutation for
    /// any dimensions.
    #[inline]
    pub fn center(&self) -> [f64; 2] {
        [
            (self.width as f64 - 1.0) / 2.0,
            (self.height as f64 - 1.0) / 2.0,
        ]
    }

    /// Radius of the circle inscribed in the pixel grid, in pixel-center
    /// units.
    #[inline]
    pub fn inscribed_radius(&self) -> f64 {
        0.5 * ((self.width.min(self.height)) as f64 - 1.0)
    }

    /// Bilinear sample at real-valued coordinates; `None` outside the grid.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Option<f64> {
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        if !x.is_finite() || !y.is_finite() || x < 0.0 || y < 0.0 || x > max_x || y > max_y {
            return None;
        }
        let x0 = x.floor().min(max_x - 1.0).max(0.0) as usize;
        let y0 = y.floor().min(max_y - 1.0).max(0.0) as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let a = self.get(x0, y0);
        let b = self.get(x1, y0);
        let c = self.get(x0, y1);
        let d = self.get(x1, y1);
        Some(a * (1.0 - fx) * (1.0 - fy) + b * fx * (1.0 - fy) + c * (1.0 - fx) * fy + d * fx * fy)
    }

    /// Mean absolute intensity difference over the inscribed circle.
    /// Panics if dimensions differ.
    pub fn mean_abs_diff_inscribed(&self, other: &GrayImage) -> f64 {
        assert_eq!(self.width, other.width);
        assert_eq!(self.height, other.height);
        let [cx, cy] = self.center();
        let r2 = self.inscribed_radius().powi(2);
        let mut sum = 0.0;
        let mut count = 0usize;
        for y in 0..self.height {
            for x in 0..self.width {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                if dx * dx + dy * dy <= r2 {
                    sum += (self.get(x, y) - other.get(x, y)).abs();
                    count += 1;
                }
            }
        }
        sum / count.max(1) as f64
    }
}

/// A rotation about a center point. Positive angles turn the image
/// visually clockwise on screen.
#[derive(Debug, Clone, Copy)]
pub struct RotationSpec {
    /// Degrees, normalized to `[0, 360)` on construction.
    pub angle_deg: f64,
    /// Rotation center in pixel coordinates; `None` means the pixel-grid
    /// center `((w-1)/2, (h-1)/2)`.
    pub center: Option<[f64; 2]>,
    /// Intensity used for samples that fall outside the source frame.
    pub fill: f64,
}

impl RotationSpec {
    pub fn new(angle_deg: f64) -> Self {
        RotationSpec {
            angle_deg: normalize_angle(angle_deg),
            center: None,
            fill: 0.0,
        }
    }

    pub fn with_fill(mut self, fill: f64) -> Self {
        self.fill = fill;
        self
    }

    pub fn with_center(mut self, center: [f64; 2]) -> Self {
        self.center = Some(center);
        self
    }
}

/// Normalizes an angle in degrees to `[0, 360)`.
#[inline]
pub fn normalize_angle(angle_deg: f64) -> f64 {
    let a = angle_deg.rem_euclid(360.0);
    if a == 360.0 {
        0.0
    } else {
        a
    }
}

/// Sine and cosine of an angle in degrees, snapped to exact values at
/// multiples of 90 so that quarter-turn rotations are pixel permutations.
fn sin_cos_deg(angle_deg: f64) -> (f64, f64) {
    let quarter = (angle_deg / 90.0).round();
    if (angle_deg - quarter * 90.0).abs() < 1e-12 {
        let q = (quarter as i64).rem_euclid(4);
        return match q {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        };
    }
    let rad = angle_deg.to_radians();
    (rad.sin(), rad.cos())
}

/// Rotates `img` per `spec` (positive = visually clockwise on screen),
/// sampling each output pixel from the inverse-rotated source location
/// with bilinear interpolation. Out-of-frame samples take `spec.fill`.
/// Output dimensions equal input dimensions.
pub fn rotate_image(img: &GrayImage, spec: &RotationSpec) -> GrayImage {
    let angle = normalize_angle(spec.angle_deg);
    if angle == 0.0 {
        return img.clone();
    }
    let [cx, cy] = spec.center.unwrap_or_else(|| img.center());
    let (s, c) = sin_cos_deg(angle);

    let mut out = vec![spec.fill; img.width * img.height];
    for y in 0..img.height {
        let dy = y as f64 - cy;
        for x in 0..img.width {
            let dx = x as f64 - cx;
            // Inverse map: rotate the destination offset counterclockwise.
            let src_x = cx + c * dx + s * dy;
            let src_y = cy - s * dx + c * dy;
            if let Some(v) = img.sample_bilinear(src_x, src_y) {
                out[y * img.width + x] = v;
            }
        }
    }
    GrayImage {
        width: img.width,
        height: img.height,
        pixels: out,
    }
}

/// Sets every pixel outside the inscribed circle to `fill`. Used to
/// suppress the artificial frame-corner edges created by rotation fill.
pub fn mask_circle(img: &GrayImage, fill: f64) -> GrayImage {
    let [cx, cy] = img.center();
    let r2 = img.inscribed_radius().powi(2);
    let mut out = img.clone();
    for y in 0..img.height {
        for x in 0..img.width {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            if dx * dx + dy * dy > r2 {
                out.set(x, y, fill);
            }
        }
    }
    out
}

/// Mirrors the image about its vertical center line (x -> w-1-x).
pub fn flip_horizontal(img: &GrayImage) -> GrayImage {
    let mut out = img.clone();
    for y in 0..img.height {
        for x in 0..img.width {
            out.set(x, y, img.get(img.width - 1 - x, y));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> GrayImage {
        let pixels = (0..w * h)
            .map(|i| {
                let x = (i % w) as f64;
                let y = (i / w) as f64;
                10.0 + 3.0 * x + 5.0 * y
            })
            .collect();
        GrayImage::new(w, h, pixels).unwrap()
    }

    #[test]
    fn new_rejects_zero_dims_and_bad_length() {
        assert!(GrayImage::new(0, 4, vec![]).is_err());
        assert!(GrayImage::new(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn rotate_zero_is_identity() {
        let img = ramp(9, 7);
        let out = rotate_image(&img, &RotationSpec::new(0.0));
        assert_eq!(out, img);
    }

    #[test]
    fn rotate_360_equals_identity() {
        let img = ramp(9, 7);
        let out = rotate_image(&img, &RotationSpec::new(360.0));
        assert_eq!(out, img);
    }

    /// 90-degree clockwise rotation checked against an independent
    /// nearest-neighbor pixel-permutation oracle: for a square image the
    /// source of destination (x, y) is (y, w-1-x).
    #[test]
    fn rotate_90_matches_permutation_oracle() {
        let n = 13;
        let mut img = GrayImage::filled(n, n, 0.0).unwrap();
        // Centered axis-aligned bright rectangle, taller than wide.
        for y in 3..10 {
            for x in 5..8 {
                img.set(x, y, 255.0);
            }
        }
        let out = rotate_image(&img, &RotationSpec::new(90.0));
        for y in 0..n {
            for x in 0..n {
                let oracle = img.get(y, n - 1 - x);
                assert!(
                    (out.get(x, y) - oracle).abs() < 1e-9,
                    "mismatch at ({x},{y}): {} vs oracle {}",
                    out.get(x, y),
                    oracle
                );
            }
        }
    }

    #[test]
    fn rotate_back_and_forth_recovers_smooth_image() {
        // Smooth radial blob; constant outside the inscribed circle.
        let n = 33;
        let c = (n as f64 - 1.0) / 2.0;
        let pixels = (0..n * n)
            .map(|i| {
                let x = (i % n) as f64 - c;
                let y = (i / n) as f64 - c;
                200.0 * (-(x * x + y * y) / 60.0).exp()
            })
            .collect();
        let img = GrayImage::new(n, n, pixels).unwrap();
        for theta in [30.0, 45.0, 75.0] {
            let once = rotate_image(&img, &RotationSpec::new(theta));
            let back = rotate_image(&once, &RotationSpec::new(360.0 - theta));
            let mad = img.mean_abs_diff_inscribed(&back);
            assert!(mad < 2.0, "theta {theta}: mean abs diff {mad}");
        }
    }

    #[test]
    fn rotation_preserves_total_intensity_within_one_percent() {
        let n = 33;
        let c = (n as f64 - 1.0) / 2.0;
        let pixels = (0..n * n)
            .map(|i| {
                let x = (i % n) as f64 - c;
                let y = (i / n) as f64 - c;
                200.0 * (-(x * x + y * y) / 40.0).exp()
            })
            .collect();
        let img = GrayImage::new(n, n, pixels).unwrap();
        let rot = rotate_image(&img, &RotationSpec::new(37.0));
        let total = |im: &GrayImage| -> f64 {
            let [cx, cy] = im.center();
            let r2 = im.inscribed_radius().powi(2);
            let mut s = 0.0;
            for y in 0..im.height() {
                for x in 0..im.width() {
                    let dx = x as f64 - cx;
                    let dy = y as f64 - cy;
                    if dx * dx + dy * dy <= r2 {
                        s += im.get(x, y);
                    }
                }
            }
            s
        };
        let a = total(&img);
        let b = total(&rot);
        assert!((a - b).abs() / a < 0.01, "totals {a} vs {b}");
    }

    #[test]
    fn mask_circle_zeroes_corners_only() {
        let img = ramp(11, 11);
        let masked = mask_circle(&img, 0.0);
        assert_eq!(masked.get(0, 0), 0.0);
        assert_eq!(masked.get(10, 10), 0.0);
        let [cx, cy] = img.center();
        assert_eq!(masked.get(cx as usize, cy as usize), img.get(5, 5));
        // Edge midpoints lie on the inscribed circle boundary and survive.
        assert_eq!(masked.get(0, 5), img.get(0, 5));
    }

    #[test]
    fn flip_horizontal_is_involution() {
        let img = ramp(8, 5);
        assert_eq!(flip_horizontal(&flip_horizontal(&img)), img);
        assert_eq!(flip_horizontal(&img).get(0, 0), img.get(7, 0));
    }

    #[test]
    fn rotate_180_twice_is_exact() {
        let img = ramp(10, 6);
        let once = rotate_image(&img, &RotationSpec::new(180.0));
        // 180 degrees about ((w-1)/2,(h-1)/2) is an exact pixel permutation.
        assert_eq!(once.get(0, 0), img.get(9, 5));
        let twice = rotate_image(&once, &RotationSpec::new(180.0));
        assert_eq!(twice, img);
    }
}
