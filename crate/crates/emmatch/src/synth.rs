//! Synthetic test shapes with analytic partial-coverage edges.
//!
//! Shapes are painted with sub-pixel bounds so region borders get a
//! single partial-intensity pixel. Crisp integer-aligned steps produce a
//! two-pixel plateau of equal Sobel magnitudes that strict non-maximum
//! suppression removes entirely; a coverage ramp yields the single
//! peaked response line the extraction stage is designed around.

use crate::raster::GrayImage;

/// Uniform background canvas.
pub fn canvas(width: usize, height: usize, background: f64) -> GrayImage {
    GrayImage::filled(width, height, background).expect("nonzero dimensions")
}

/// Over-composites an axis-aligned rectangle with real-valued bounds
/// (pixel `i` spans `[i-0.5, i+0.5]`); boundary pixels get the exact
/// coverage fraction.
pub fn draw_rect(img: &mut GrayImage, x0: f64, y0: f64, x1: f64, y1: f64, intensity: f64) {
    let overlap = |lo: f64, hi: f64, a: f64, b: f64| -> f64 {
        (hi.min(b) - lo.max(a)).clamp(0.0, 1.0)
    };
    for y in 0..img.height() {
        let fy = y as f64;
        let cov_y = overlap(fy - 0.5, fy + 0.5, y0, y1);
        if cov_y == 0.0 {
            continue;
        }
        for x in 0..img.width() {
            let fx = x as f64;
            let cov = overlap(fx - 0.5, fx + 0.5, x0, x1) * cov_y;
            if cov > 0.0 {
                let v = img.get(x, y);
                img.set(x, y, v * (1.0 - cov) + intensity * cov);
            }
        }
    }
}

/// Over-composites a disk; the rim ramps linearly over one pixel.
pub fn draw_disk(img: &mut GrayImage, cx: f64, cy: f64, radius: f64, intensity: f64) {
    for y in 0..img.height() {
        for x in 0..img.width() {
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            let cov = (radius + 0.5 - d).clamp(0.0, 1.0);
            if cov > 0.0 {
                let v = img.get(x, y);
                img.set(x, y, v * (1.0 - cov) + intensity * cov);
            }
        }
    }
}

/// Bright rectangle centered on the pixel-grid center: the classic
/// restoring-moment test shape. `rw`/`rh` are the rectangle's side
/// lengths in pixels.
pub fn centered_rect(size: usize, rw: f64, rh: f64) -> GrayImage {
    let mut img = canvas(size, size, 0.0);
    let c = (size as f64 - 1.0) / 2.0;
    draw_rect(
        &mut img,
        c - rw / 2.0,
        c - rh / 2.0,
        c + rw / 2.0,
        c + rh / 2.0,
        255.0,
    );
    img
}
