//! Debug/visual exports: edge maps as PGM, current and force fields as
//! arrow-glyph PPM or SVG (8-direction arrows, dots at positions without
//! an element), and the per-element force/moment CSV.

use std::fs;
use std::path::Path;

use crate::edgecurrent::{compass_index, CurrentSet, COMPASS};
use crate::emfield::{moment_of_force, ForceSample};
use crate::error::{Error, Result};
use crate::raster::GrayImage;

/// Edge map raster: edge pixels 255, everything else 0.
pub fn edge_map_image(width: usize, height: usize, edges: &[(usize, usize)]) -> GrayImage {
    let mut img = GrayImage::filled(width, height, 0.0).expect("nonzero dimensions");
    for &(x, y) in edges {
        img.set(x, y, 255.0);
    }
    img
}

/// An arrow (or a dot when `dir` is `None`) per grid cell.
struct Glyph {
    x: usize,
    y: usize,
    dir: Option<usize>, // index into COMPASS
}

fn current_glyphs(set: &CurrentSet) -> Vec<Glyph> {
    let [w, h] = set.dims;
    let mut dir = vec![None; w * h];
    for e in &set.elements {
        let (x, y) = (e.pos[0].round() as usize, e.pos[1].round() as usize);
        if x < w && y < h {
            dir[y * w + x] = Some(compass_index(e.vec));
        }
    }
    (0..w * h)
        .map(|i| Glyph {
            x: i % w,
            y: i / w,
            dir: dir[i],
        })
        .collect()
}

fn force_glyphs(set: &CurrentSet, samples: &[ForceSample]) -> Vec<Glyph> {
    let [w, h] = set.dims;
    let mut dir = vec![None; w * h];
    for s in samples {
        let e = &set.elements[s.element_index];
        let (x, y) = (e.pos[0].round() as usize, e.pos[1].round() as usize);
        if x < w && y < h && (s.force[0] != 0.0 || s.force[1] != 0.0) {
            dir[y * w + x] = Some(compass_index(s.force));
        }
    }
    (0..w * h)
        .map(|i| Glyph {
            x: i % w,
            y: i / w,
            dir: dir[i],
        })
        .collect()
}

const CELL: usize = 9; // pixels per grid cell in PPM glyph renderings

fn render_glyphs_ppm(glyphs: &[Glyph], dims: [usize; 2]) -> (usize, usize, Vec<u8>) {
    let (w, h) = (dims[0] * CELL, dims[1] * CELL);
    let mut rgb = vec![255u8; w * h * 3];
    let mut put = |x: isize, y: isize| {
        if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
            let i = (y as usize * w + x as usize) * 3;
            rgb[i] = 0;
            rgb[i + 1] = 0;
            rgb[i + 2] = 0;
        }
    };
    for g in glyphs {
        let cx = (g.x * CELL + CELL / 2) as isize;
        let cy = (g.y * CELL + CELL / 2) as isize;
        match g.dir {
            None => put(cx, cy),
            Some(k) => {
                let [dx, dy] = COMPASS[k];
                // Shaft from tail to tip through the cell center.
                for t in -3..=3 {
                    put(
                        cx + (t as f64 * dx).round() as isize,
                        cy + (t as f64 * dy).round() as isize,
                    );
                }
                // Arrowhead: two side pixels behind the tip.
                let tip = (
                    cx + (3.0 * dx).round() as isize,
                    cy + (3.0 * dy).round() as isize,
                );
                let (nx, ny) = (-dy, dx);
                for s in [-1.0, 1.0] {
                    put(
                        tip.0 + (s * nx - dx).round() as isize,
                        tip.1 + (s * ny - dy).round() as isize,
                    );
                }
            }
        }
    }
    (w, h, rgb)
}

fn write_ppm(path: &Path, width: usize, height: usize, rgb: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(rgb.len() + 32);
    out.extend_from_slice(format!("P6\n{width} {height}\n255\n").as_bytes());
    out.extend_from_slice(rgb);
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn render_glyphs_svg(glyphs: &[Glyph], dims: [usize; 2]) -> String {
    let cell = 12.0;
    let (w, h) = (dims[0] as f64 * cell, dims[1] as f64 * cell);
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{w:.0}\" height=\"{h:.0}\" fill=\"white\"/>\n"
    ));
    for g in glyphs {
        let cx = (g.x as f64 + 0.5) * cell;
        let cy = (g.y as f64 + 0.5) * cell;
        match g.dir {
            None => svg.push_str(&format!(
                "<circle cx=\"{cx:.1}\" cy=\"{cy:.1}\" r=\"0.6\" fill=\"#b0b0b0\"/>\n"
            )),
            Some(k) => {
                let [dx, dy] = COMPASS[k];
                let (x1, y1) = (cx - 4.0 * dx, cy - 4.0 * dy);
                let (x2, y2) = (cx + 4.0 * dx, cy + 4.0 * dy);
                let (nx, ny) = (-dy, dx);
                svg.push_str(&format!(
                    "<line x1=\"{x1:.1}\" y1=\"{y1:.1}\" x2=\"{x2:.1}\" y2=\"{y2:.1}\" stroke=\"black\" stroke-width=\"1\"/>\n"
                ));
                svg.push_str(&format!(
                    "<polygon points=\"{:.1},{:.1} {:.1},{:.1} {:.1},{:.1}\" fill=\"black\"/>\n",
                    x2 + 2.0 * dx,
                    y2 + 2.0 * dy,
                    x2 - 1.5 * dx + 1.5 * nx,
                    y2 - 1.5 * dy + 1.5 * ny,
                    x2 - 1.5 * dx - 1.5 * nx,
                    y2 - 1.5 * dy - 1.5 * ny
                ));
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Current-field arrows (8-direction) as a PPM file; dots mark pixels
/// without a current element.
pub fn write_current_arrows_ppm(set: &CurrentSet, path: impl AsRef<Path>) -> Result<()> {
    let (w, h, rgb) = render_glyphs_ppm(&current_glyphs(set), set.dims);
    write_ppm(path.as_ref(), w, h, &rgb)
}

/// Current-field arrows as an SVG file.
pub fn write_current_arrows_svg(set: &CurrentSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_glyphs_svg(&current_glyphs(set), set.dims))
        .map_err(|e| Error::io(path, e))
}

/// Force-field arrows (direction of the in-plane force on each element)
/// as a PPM file.
pub fn write_force_arrows_ppm(
    set: &CurrentSet,
    samples: &[ForceSample],
    path: impl AsRef<Path>,
) -> Result<()> {
    let (w, h, rgb) = render_glyphs_ppm(&force_glyphs(set, samples), set.dims);
    write_ppm(path.as_ref(), w, h, &rgb)
}

/// Force-field arrows as an SVG file.
pub fn write_force_arrows_svg(
    set: &CurrentSet,
    samples: &[ForceSample],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_glyphs_svg(&force_glyphs(set, samples), set.dims))
        .map_err(|e| Error::io(path, e))
}

/// Per-element numeric dump: `x,y,tx,ty,fx,fy,moment`, one row per
/// element of the acted-on set, moments about `set.center`.
pub fn write_force_csv(
    set: &CurrentSet,
    samples: &[ForceSample],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("x,y,tx,ty,fx,fy,moment\n");
    for s in samples {
        let e = &set.elements[s.element_index];
        let m = moment_of_force(e.pos, s.force, set.center);
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            e.pos[0], e.pos[1], e.vec[0], e.vec[1], s.force[0], s.force[1], m
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edgecurrent::{extract_current_set, EdgeParams};
    use crate::emfield::{force_field, SceneConfig};
    use crate::synth;

    #[test]
    fn edge_map_marks_exactly_the_edges() {
        let img = edge_map_image(4, 3, &[(1, 1), (2, 2)]);
        assert_eq!(img.get(1, 1), 255.0);
        assert_eq!(img.get(2, 2), 255.0);
        assert_eq!(img.pixels().iter().filter(|&&v| v != 0.0).count(), 2);
    }

    #[test]
    fn arrow_exports_have_expected_headers() {
        let img = synth::centered_rect(16, 8.4, 5.4);
        let set = extract_current_set(&img, &EdgeParams::default(), 0.0).unwrap();
        assert!(!set.is_empty());
        let dir = tempfile::tempdir().unwrap();

        let ppm = dir.path().join("current.ppm");
        write_current_arrows_ppm(&set, &ppm).unwrap();
        let bytes = fs::read(&ppm).unwrap();
        assert!(bytes.starts_with(b"P6\n144 144\n255\n"));

        let svg = dir.path().join("current.svg");
        write_current_arrows_svg(&set, &svg).unwrap();
        let text = fs::read_to_string(&svg).unwrap();
        assert!(text.starts_with("<svg"));
        assert_eq!(text.matches("<line").count(), set.len());
    }

    #[test]
    fn force_csv_has_one_row_per_element() {
        let img = synth::centered_rect(16, 8.4, 5.4);
        let set = extract_current_set(&img, &EdgeParams::default(), 0.0).unwrap();
        let other = extract_current_set(&img, &EdgeParams::default(), 0.0).unwrap();
        let cfg = SceneConfig::default();
        let samples = force_field(&set, &other, &cfg);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("forces.csv");
        write_force_csv(&set, &samples, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), set.len() + 1);
        assert!(text.starts_with("x,y,tx,ty,fx,fy,moment\n"));
    }
}
