//! Significant-edge extraction and conversion of edge gradients into an
//! image's virtual current: one discrete current element per surviving
//! edge pixel, perpendicular to the local gradient.
//!
//! Coordinate and sign conventions (screen frame, x right, y down):
//! the Sobel `gy` kernel is the transpose of `gx`, so positive `gy`
//! points down-screen; the gradient-to-current turn is the visually
//! counterclockwise quarter rotation `(gx, gy) -> (gy, -gx)` (an
//! eastward gradient becomes an up-screen current). Both images of a
//! matching pair must use the same turn direction; nothing else depends
//! on which direction it is.

use crate::error::{Error, Result};
use crate::raster::GrayImage;

/// Per-pixel gradient vectors in screen coordinates. The one-pixel
/// border ring is zero (the 3x3 Sobel stencil is undefined there).
#[derive(Debug, Clone)]
pub struct GradientField {
    width: usize,
    height: usize,
    gx: Vec<f64>,
    gy: Vec<f64>,
    mag: Vec<f64>,
}

impl GradientField {
    pub(crate) fn from_vectors(width: usize, height: usize, gx: Vec<f64>, gy: Vec<f64>) -> Self {
        assert_eq!(gx.len(), width * height);
        assert_eq!(gy.len(), width * height);
        let mag = gx
            .iter()
            .zip(&gy)
            .map(|(&x, &y)| x.hypot(y))
            .collect();
        GradientField {
            width,
            height,
            gx,
            gy,
            mag,
        }
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
    pub fn vector(&self, x: usize, y: usize) -> [f64; 2] {
        let i = y * self.width + x;
        [self.gx[i], self.gy[i]]
    }

    #[inline]
    pub fn magnitude(&self, x: usize, y: usize) -> f64 {
        self.mag[y * self.width + x]
    }

    pub fn max_magnitude(&self) -> f64 {
        self.mag.iter().cloned().fold(0.0, f64::max)
    }
}

/// Edge extraction parameters.
#[derive(Debug, Clone, Copy)]
pub struct EdgeParams {
    /// Magnitude threshold as a fraction of the field's maximum, in (0, 1).
    pub threshold_percent: f64,
    /// Snap current directions to the 8 compass directions.
    pub quantize_directions: bool,
}

impl Default for EdgeParams {
    fn default() -> Self {
        EdgeParams {
            threshold_percent: 0.10,
            quantize_directions: true,
        }
    }
}

impl EdgeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_percent > 0.0 && self.threshold_percent < 1.0) {
            return Err(Error::InvalidParam(format!(
                "threshold_percent must be in (0, 1), got {}",
                self.threshold_percent
            )));
        }
        Ok(())
    }
}

/// One discrete virtual current element: a current vector at a pixel
/// position. Magnitude equals the source gradient magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentElement {
    pub pos: [f64; 2],
    pub vec: [f64; 2],
}

impl CurrentElement {
    #[inline]
    pub fn magnitude(&self) -> f64 {
        self.vec[0].hypot(self.vec[1])
    }
}

/// All current elements of one image plus its plane height and the
/// rotation/moment reference point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentSet {
    pub elements: Vec<CurrentElement>,
    /// Height of the image plane on the z axis, in pixels.
    pub z: f64,
    /// Moment origin and rotation center, usually the image center.
    pub center: [f64; 2],
    pub dims: [usize; 2],
}

impl CurrentSet {
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }
}

/// 3x3 Sobel response over the interior; the border ring stays zero.
/// `gx` kernel `[[-1,0,1],[-2,0,2],[-1,0,1]]`, `gy` its transpose
/// (positive `gy` points down-screen). Responses are unnormalized.
pub fn sobel_gradient(img: &GrayImage) -> Result<GradientField> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::TooSmall {
            width: w,
            height: h,
        });
    }
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let p = |dx: isize, dy: isize| -> f64 {
                img.get((x as isize + dx) as usize, (y as isize + dy) as usize)
            };
            let east = p(1, -1) + 2.0 * p(1, 0) + p(1, 1);
            let west = p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1);
            let south = p(-1, 1) + 2.0 * p(0, 1) + p(1, 1);
            let north = p(-1, -1) + 2.0 * p(0, -1) + p(1, -1);
            let i = y * w + x;
            gx[i] = east - west;
            gy[i] = south - north;
        }
    }
    Ok(GradientField::from_vectors(w, h, gx, gy))
}

const NMS_PAIRS: [[(isize, isize); 2]; 4] = [
    [(-1, 0), (1, 0)],   // west / east
    [(0, -1), (0, 1)],   // north / south
    [(-1, -1), (1, 1)],  // northwest / southeast
    [(1, -1), (-1, 1)],  // northeast / southwest
];

/// Significant edge pixels: magnitude at least `threshold_percent` of
/// the field maximum, and strictly greater than both neighbors of at
/// least two of the four direction pairs {W,E}, {N,S}, {NW,SE},
/// {NE,SW}. Border-ring pixels are never returned. Output is in
/// row-major order.
pub fn extract_significant_edges(
    field: &GradientField,
    params: &EdgeParams,
) -> Vec<(usize, usize)> {
    let (w, h) = (field.width, field.height);
    if w < 3 || h < 3 {
        return Vec::new();
    }
    let threshold = params.threshold_percent * field.max_magnitude();
    let mut edges = Vec::new();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let m = field.mag[y * w + x];
            if m <= 0.0 || m < threshold {
                continue;
            }
            let mut pairs = 0;
            for pair in &NMS_PAIRS {
                let beats = pair.iter().all(|&(dx, dy)| {
                    let nx = (x as isize + dx) as usize;
                    let ny = (y as isize + dy) as usize;
                    m > field.mag[ny * w + nx]
                });
                if beats {
                    pairs += 1;
                }
            }
            if pairs >= 2 {
                edges.push((x, y));
            }
        }
    }
    edges
}

/// Unit vectors of the 8 compass directions in screen coordinates,
/// indexed by visual angle counterclockwise from east in 45-degree
/// steps: E, NE, N, NW, W, SW, S, SE.
pub(crate) const COMPASS: [[f64; 2]; 8] = [
    [1.0, 0.0],
    [std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2],
    [0.0, -1.0],
    [-std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2],
    [-1.0, 0.0],
    [-std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
    [0.0, 1.0],
    [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
];

/// Index into [`COMPASS`] of the direction nearest to `vec` (45-degree
/// sectors; exact sector-boundary ties go to the counterclockwise side).
pub(crate) fn compass_index(vec: [f64; 2]) -> usize {
    // Visual angle on screen: counterclockwise positive, y flipped.
    let phi = (-vec[1]).atan2(vec[0]).to_degrees();
    let k = (phi / 45.0 + 0.5).floor() as i64;
    k.rem_euclid(8) as usize
}

/// Converts edge-pixel gradients into current elements by the visually
/// counterclockwise quarter turn `(gx, gy) -> (gy, -gx)`; in quantized
/// mode the direction snaps to the nearest compass direction with the
/// magnitude preserved. Zero-magnitude pixels are dropped.
pub fn gradient_to_current(
    field: &GradientField,
    edges: &[(usize, usize)],
    params: &EdgeParams,
    z: f64,
    center: [f64; 2],
) -> CurrentSet {
    let mut elements = Vec::with_capacity(edges.len());
    for &(x, y) in edges {
        let [gx, gy] = field.vector(x, y);
        let vec = [gy, -gx];
        let mag = vec[0].hypot(vec[1]);
        if mag == 0.0 {
            continue;
        }
        let vec = if params.quantize_directions {
            let dir = COMPASS[compass_index(vec)];
            [dir[0] * mag, dir[1] * mag]
        } else {
            vec
        };
        elements.push(CurrentElement {
            pos: [x as f64, y as f64],
            vec,
        });
    }
    CurrentSet {
        elements,
        z,
        center,
        dims: [field.width, field.height],
    }
}

/// Full extraction pipeline for one image: Sobel, thresholded
/// non-maximum suppression, gradient-to-current conversion. The moment
/// center is the image's pixel-grid center.
pub fn extract_current_set(img: &GrayImage, params: &EdgeParams, z: f64) -> Result<CurrentSet> {
    params.validate()?;
    let field = sobel_gradient(img)?;
    let edges = extract_significant_edges(&field, params);
    Ok(gradient_to_current(&field, &edges, params, z, img.center()))
}
