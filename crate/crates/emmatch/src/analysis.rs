//! Moment-sign analysis over discrete rotation angles: sweep the total
//! moment's sign across a full turn, decompose the diagram into
//! equal-sign sections, identify convergence ranges and oscillating
//! (locally balanced) angles, and export bar/pie diagrams plus CSV.

use std::fs;
use std::path::Path;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::edgecurrent::{extract_current_set, CurrentSet, EdgeParams};
use crate::emfield::{moment_sign, total_moment, SceneConfig};
use crate::error::{Error, Result};
use crate::raster::{mask_circle, rotate_image, GrayImage, RotationSpec};

/// Parameters of a sign-distribution sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepParams {
    /// Number of equal angle intervals over the full turn; must divide
    /// 360. The sampled angles are `i * 360/intervals` for `i = 1..=intervals`.
    pub intervals: usize,
    /// Moments with `|m| <= zero_band` record sign 0.
    pub zero_band: f64,
    pub edge_params: EdgeParams,
    /// Scene for the kernels; `scene.z_separation` is the plane distance
    /// `d` (rotated image at `z = d`, original at `z = 0`).
    pub scene: SceneConfig,
    /// Fill intensity for out-of-frame samples when rotating.
    pub fill: f64,
    /// Zero everything outside the inscribed circle before extraction.
    pub mask_circle: bool,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            intervals: 120,
            zero_band: 0.0,
            edge_params: EdgeParams::default(),
            scene: SceneConfig::default(),
            fill: 0.0,
            mask_circle: false,
        }
    }
}

impl SweepParams {
    pub fn validate(&self) -> Result<()> {
        if self.intervals < 4 || 360 % self.intervals != 0 {
            return Err(Error::InvalidParam(format!(
                "intervals must be >= 4 and divide 360, got {}",
                self.intervals
            )));
        }
        if !(self.zero_band >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "zero_band must be non-negative, got {}",
                self.zero_band
            )));
        }
        self.edge_params.validate()?;
        self.scene.validate()
    }

    #[inline]
    pub fn step_deg(&self) -> f64 {
        360.0 / self.intervals as f64
    }
}

/// A maximal run of equal nonzero sign in the sweep. Zero-sign entries
/// separate nothing: runs of equal sign merge across them, so adjacent
/// sections always carry different signs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    /// Index range (into the sweep arrays) of the first and last
    /// nonzero entry of the run.
    pub start_index: usize,
    pub end_index: usize,
    /// Sampled angles of those entries, degrees.
    pub start_deg: f64,
    pub end_deg: f64,
    pub sign: i8,
}

/// An angle range from which the moment restores the rotated image
/// toward zero deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvergenceRange {
    /// `(0°, end]`: clockwise deviations restored counterclockwise.
    Leading { end_deg: f64 },
    /// `[start, 360°)`: counterclockwise deviations restored clockwise.
    Trailing { start_deg: f64 },
    /// `(0°, 360°)`: every deviation restores.
    Full,
}

impl std::fmt::Display for ConvergenceRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConvergenceRange::Leading { end_deg } => write!(f, "(0\u{b0}, {end_deg}\u{b0}]"),
            ConvergenceRange::Trailing { start_deg } => {
                write!(f, "[{start_deg}\u{b0}, 360\u{b0})")
            }
            ConvergenceRange::Full => write!(f, "(0\u{b0}, 360\u{b0})"),
        }
    }
}

/// Moment sign versus discrete rotation angle, with the section
/// decomposition and the derived convergence/oscillation structure.
#[derive(Debug, Clone)]
pub struct SignDistribution {
    pub step_deg: f64,
    /// Sampled angles `i * step` for `i = 1..=intervals`.
    pub angles: Vec<f64>,
    /// Raw total moments, aligned with `angles`.
    pub moments: Vec<f64>,
    /// Signs in {-1, 0, +1} under the zero-band rule.
    pub signs: Vec<i8>,
    pub sections: Vec<Section>,
    pub convergence: Vec<ConvergenceRange>,
    pub oscillating_angles: Vec<f64>,
}

impl SignDistribution {
    /// Builds the distribution from raw sweep output and derives
    /// sections, convergence ranges and oscillating angles.
    pub fn from_samples(step_deg: f64, angles: Vec<f64>, moments: Vec<f64>, zero_band: f64) -> Self {
        let signs: Vec<i8> = moments.iter().map(|&m| moment_sign(m, zero_band)).collect();
        let sections = compute_sections(&signs, &angles);
        let mut dist = SignDistribution {
            step_deg,
            angles,
            moments,
            signs,
            sections,
            convergence: Vec::new(),
            oscillating_angles: Vec::new(),
        };
        dist.convergence = detect_convergence(&dist);
        dist.oscillating_angles = detect_oscillating_angles(&dist);
        dist
    }
}

/// Maximal runs of equal nonzero sign, in angle order.
pub fn compute_sections(signs: &[i8], angles: &[f64]) -> Vec<Section> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, (&s, &a)) in signs.iter().zip(angles).enumerate() {
        if s == 0 {
            continue;
        }
        match sections.last_mut() {
            Some(last) if last.sign == s => {
                last.end_index = i;
                last.end_deg = a;
            }
            _ => sections.push(Section {
                start_index: i,
                end_index: i,
                start_deg: a,
                end_deg: a,
                sign: s,
            }),
        }
    }
    sections
}

/// The convergence ranges of a distribution: the first section when its
/// sign is negative (range `(0°, a]` with `a` its last sampled angle)
/// and the last section when its sign is positive (range `[b, 360°)`
/// with `b` one step before its first sampled angle). A two-section
/// `(-, +)` distribution converges over the whole turn. Returns an
/// empty list, with a warning, when every sign is zero.
pub fn detect_convergence(dist: &SignDistribution) -> Vec<ConvergenceRange> {
    let sections = &dist.sections;
    if sections.is_empty() {
        log::warn!("sign distribution has no nonzero entries; no convergence range");
        return Vec::new();
    }
    if sections.len() == 2 && sections[0].sign == -1 && sections[1].sign == 1 {
        return vec![ConvergenceRange::Full];
    }
    let mut ranges = Vec::new();
    let first = &sections[0];
    if first.sign == -1 {
        ranges.push(ConvergenceRange::Leading {
            end_deg: first.end_deg,
        });
    }
    let last = sections.last().unwrap();
    if sections.len() > 1 && last.sign == 1 {
        ranges.push(ConvergenceRange::Trailing {
            start_deg: last.start_deg - dist.step_deg,
        });
    }
    ranges
}

/// Interior section boundaries with sign pattern `(+, -)`: the moment
/// pushes toward the boundary from both sides, so the matcher oscillates
/// there. The boundary angle is the midpoint between the adjacent
/// sampled section edges. The 0°/360° wrap is excluded.
pub fn detect_oscillating_angles(dist: &SignDistribution) -> Vec<f64> {
    dist.sections
        .windows(2)
        .filter(|w| w[0].sign == 1 && w[1].sign == -1)
        .map(|w| (w[0].end_deg + w[1].start_deg) / 2.0)
        .collect()
}

/// Total moment for one rotation angle of the standalone pipeline:
/// rotate clockwise, extract the rotated image's current at
/// `z = d` and take the moment applied on it by `original_set`.
fn moment_for_angle(
    original: &GrayImage,
    original_set: &CurrentSet,
    angle_deg: f64,
    params: &SweepParams,
) -> Result<f64> {
    let spec = RotationSpec::new(angle_deg).with_fill(params.fill);
    let mut rotated = rotate_image(original, &spec);
    if params.mask_circle {
        rotated = mask_circle(&rotated, params.fill);
    }
    let rotated_set = extract_current_set(&rotated, &params.edge_params, params.scene.z_separation)?;
    if rotated_set.is_empty() {
        return Err(Error::EmptyCurrentSet {
            angle_deg: Some(angle_deg),
        });
    }
    Ok(total_moment(&rotated_set, original_set, &params.scene).total)
}

fn prepared_original_set(original: &GrayImage, params: &SweepParams) -> Result<CurrentSet> {
    let prepared = if params.mask_circle {
        mask_circle(original, params.fill)
    } else {
        original.clone()
    };
    let set = extract_current_set(&prepared, &params.edge_params, 0.0)?;
    if set.is_empty() {
        return Err(Error::EmptyCurrentSet { angle_deg: None });
    }
    Ok(set)
}

/// Single-angle entry of the sweep pipeline, re-extracting the original
/// image's current set. In deterministic mode this is bit-identical to
/// the corresponding sweep entry.
pub fn moment_at_angle(original: &GrayImage, angle_deg: f64, params: &SweepParams) -> Result<f64> {
    params.validate()?;
    let original_set = prepared_original_set(original, params)?;
    moment_for_angle(original, &original_set, angle_deg, params)
}

/// Sweeps the total moment's sign over `params.intervals` equal rotation
/// angles: for each `i` the original is rotated clockwise by `i * step`
/// about its center, both images' currents are extracted (original at
/// `z = 0`, rotated at `z = d`), and the sign of the moment on the
/// rotated image is recorded. Angle entries are independent and run in
/// parallel under `ExecMode::Parallel`; assembly is ordered by angle.
pub fn sweep_moment_signs(original: &GrayImage, params: &SweepParams) -> Result<SignDistribution> {
    params.validate()?;
    let original_set = prepared_original_set(original, params)?;
    let step = params.step_deg();
    let angles: Vec<f64> = (1..=params.intervals).map(|i| i as f64 * step).collect();

    let moment_at = |&angle: &f64| moment_for_angle(original, &original_set, angle, params);
    let moments: Result<Vec<f64>> = match params.scene.exec {
        #[cfg(feature = "parallel")]
        crate::emfield::ExecMode::Parallel => angles.par_iter().map(moment_at).collect(),
        _ => angles.iter().map(moment_at).collect(),
    };

    Ok(SignDistribution::from_samples(
        step,
        angles,
        moments?,
        params.zero_band,
    ))
}

/// Diagram style for [`export_sign_diagram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagramStyle {
    /// Sign-versus-interval plot.
    Bar,
    /// Circular section chart with per-section turn arrows and
    /// valid/invalid annotations.
    Pie,
}

/// Writes the distribution as an SVG diagram at `path` plus the
/// machine-readable CSV next to it (same stem, `.csv` extension).
pub fn export_sign_diagram(
    dist: &SignDistribution,
    path: impl AsRef<Path>,
    style: DiagramStyle,
) -> Result<()> {
    let path = path.as_ref();
    let svg = match style {
        DiagramStyle::Bar => render_sign_bar_svg(dist),
        DiagramStyle::Pie => render_sign_pie_svg(dist),
    };
    fs::write(path, svg).map_err(|e| Error::io(path, e))?;
    write_sign_csv(dist, path.with_extension("csv"))
}

/// CSV schema: header `angle_deg,moment,sign`, one row per sampled
/// angle. Floats use the shortest round-trip formatting, so the file
/// reproduces the distribution exactly.
pub fn write_sign_csv(dist: &SignDistribution, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("angle_deg,moment,sign\n");
    for i in 0..dist.angles.len() {
        out.push_str(&format!(
            "{},{},{}\n",
            dist.angles[i], dist.moments[i], dist.signs[i]
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a CSV produced by [`write_sign_csv`].
pub fn read_sign_csv(path: impl AsRef<Path>) -> Result<(Vec<f64>, Vec<f64>, Vec<i8>)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut angles = Vec::new();
    let mut moments = Vec::new();
    let mut signs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line.trim() != "angle_deg,moment,sign" {
                return Err(Error::Format(format!(
                    "{}: unexpected CSV header {line:?}",
                    path.display()
                )));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let mut next = |what: &str| {
            fields
                .next()
                .ok_or_else(|| Error::Format(format!("{}: missing {what} on line {}", path.display(), lineno + 1)))
        };
        let angle: f64 = next("angle")?.trim().parse().map_err(|e| {
            Error::Format(format!("{}: line {}: {e}", path.display(), lineno + 1))
        })?;
        let moment: f64 = next("moment")?.trim().parse().map_err(|e| {
            Error::Format(format!("{}: line {}: {e}", path.display(), lineno + 1))
        })?;
        let sign: i8 = next("sign")?.trim().parse().map_err(|e| {
            Error::Format(format!("{}: line {}: {e}", path.display(), lineno + 1))
        })?;
        angles.push(angle);
        moments.push(moment);
        signs.push(sign);
    }
    Ok((angles, moments, signs))
}

/// Sign-versus-interval bar diagram as an SVG string.
pub fn render_sign_bar_svg(dist: &SignDistribution) -> String {
    let n = dist.angles.len().max(1);
    let cell = 6.0_f64;
    let half = 60.0_f64;
    let margin = 40.0_f64;
    let width = margin * 2.0 + n as f64 * cell;
    let height = margin * 2.0 + half * 2.0;
    let y_mid = margin + half;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"white\"/>\n"
    ));
    // Axes: zero line and the y = +/-1 guides.
    svg.push_str(&format!(
        "<line x1=\"{margin}\" y1=\"{y_mid}\" x2=\"{:.1}\" y2=\"{y_mid}\" stroke=\"black\"/>\n",
        width - margin
    ));
    for (level, label) in [(-1.0, "+1"), (1.0, "-1")] {
        let y = y_mid + level * half;
        svg.push_str(&format!(
            "<line x1=\"{margin}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#cccccc\" stroke-dasharray=\"4 3\"/>\n",
            width - margin
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{label}</text>\n",
            margin - 6.0,
            y + 4.0
        ));
    }
    for (i, &s) in dist.signs.iter().enumerate() {
        if s == 0 {
            continue;
        }
        let x = margin + i as f64 * cell;
        let bar_h = half - 2.0;
        let y = if s > 0 { y_mid - bar_h } else { y_mid };
        svg.push_str(&format!(
            "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{:.1}\" height=\"{bar_h:.1}\" fill=\"{}\"/>\n",
            cell - 1.0,
            if s > 0 { "#444444" } else { "#999999" }
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">interval (of {})</text>\n",
        width / 2.0,
        height - 10.0,
        n
    ));
    svg.push_str("</svg>\n");
    svg
}

fn pie_point(cx: f64, cy: f64, r: f64, angle_deg: f64) -> (f64, f64) {
    // Deviation angle 0 at 12 o'clock, increasing clockwise on screen.
    let phi = (angle_deg - 90.0).to_radians();
    (cx + r * phi.cos(), cy + r * phi.sin())
}

/// Circular section chart: one shaded wedge per section with an arrow
/// showing the moment's turn direction inside it, valid/invalid labels
/// (valid = convergence sections), and markers at oscillating angles.
pub fn render_sign_pie_svg(dist: &SignDistribution) -> String {
    let size = 420.0;
    let (cx, cy) = (size / 2.0, size / 2.0);
    let r = size * 0.38;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size:.0}\" height=\"{size:.0}\" viewBox=\"0 0 {size:.0} {size:.0}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{size:.0}\" height=\"{size:.0}\" fill=\"white\"/>\n"
    ));

    let sections = &dist.sections;
    if sections.is_empty() {
        svg.push_str(&format!(
            "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"{r:.1}\" fill=\"#eeeeee\" stroke=\"black\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{cx}\" y=\"{cy}\" font-size=\"13\" text-anchor=\"middle\">all zero</text>\n"
        ));
        svg.push_str("</svg>\n");
        return svg;
    }

    // Wedge boundaries: midpoints between adjacent section edges; the
    // first wedge starts at 0 and the last ends at 360.
    let n = sections.len();
    let mut bounds = Vec::with_capacity(n + 1);
    bounds.push(0.0);
    for w in sections.windows(2) {
        bounds.push((w[0].end_deg + w[1].start_deg) / 2.0);
    }
    bounds.push(360.0);

    let convergent: Vec<bool> = (0..n)
        .map(|i| {
            (i == 0 && sections[0].sign == -1)
                || (i == n - 1 && n > 1 && sections[n - 1].sign == 1)
        })
        .collect();

    for i in 0..n {
        let (a0, a1) = (bounds[i], bounds[i + 1]);
        let (x0, y0) = pie_point(cx, cy, r, a0);
        let (x1, y1) = pie_point(cx, cy, r, a1);
        let large = if a1 - a0 > 180.0 { 1 } else { 0 };
        let fill = if sections[i].sign > 0 { "#d8d8d8" } else { "#a0a0a0" };
        if n == 1 {
            svg.push_str(&format!(
                "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"{r:.1}\" fill=\"{fill}\" stroke=\"black\"/>\n"
            ));
        } else {
            svg.push_str(&format!(
                "<path d=\"M {cx:.2} {cy:.2} L {x0:.2} {y0:.2} A {r:.2} {r:.2} 0 {large} 1 {x1:.2} {y1:.2} Z\" fill=\"{fill}\" stroke=\"black\" stroke-width=\"0.8\"/>\n"
            ));
        }

        let mid = (a0 + a1) / 2.0;
        // Turn-direction arrow: tangent at the wedge midpoint; positive
        // sign turns clockwise (increasing deviation angle).
        let (px, py) = pie_point(cx, cy, r * 0.80, mid);
        let phi = (mid - 90.0).to_radians();
        let (tx, ty) = (-phi.sin(), phi.cos()); // tangent of increasing angle
        let dir = sections[i].sign as f64;
        let (hx, hy) = (px + 12.0 * dir * tx, py + 12.0 * dir * ty);
        let (bx, by) = (px - 12.0 * dir * tx, py - 12.0 * dir * ty);
        let (nx, ny) = (phi.cos(), phi.sin());
        svg.push_str(&format!(
            "<line x1=\"{bx:.2}\" y1=\"{by:.2}\" x2=\"{hx:.2}\" y2=\"{hy:.2}\" stroke=\"black\" stroke-width=\"1.6\"/>\n"
        ));
        svg.push_str(&format!(
            "<polygon points=\"{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}\" fill=\"black\"/>\n",
            hx + 6.0 * dir * tx,
            hy + 6.0 * dir * ty,
            hx + 3.0 * nx,
            hy + 3.0 * ny,
            hx - 3.0 * nx,
            hy - 3.0 * ny
        ));

        let (lx, ly) = pie_point(cx, cy, r * 0.52, mid);
        svg.push_str(&format!(
            "<text x=\"{lx:.1}\" y=\"{ly:.1}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            if convergent[i] { "valid" } else { "invalid" }
        ));
    }

    // Oscillating angles: radial dashed markers.
    for &osc in &dist.oscillating_angles {
        let (x1, y1) = pie_point(cx, cy, r, osc);
        let (x2, y2) = pie_point(cx, cy, r * 1.12, osc);
        svg.push_str(&format!(
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"black\" stroke-dasharray=\"3 2\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{x2:.1}\" y=\"{y2:.1}\" font-size=\"11\">osc {osc:.1}\u{b0}</text>\n"
        ));
    }
    // 0-degree reference at 12 o'clock.
    let (zx, zy) = pie_point(cx, cy, r * 1.06, 0.0);
    svg.push_str(&format!(
        "<text x=\"{zx:.1}\" y=\"{zy:.1}\" font-size=\"11\" text-anchor=\"middle\">0\u{b0}</text>\n"
    ));
    svg.push_str("</svg>\n");
    svg
}
