//! The iterative moment-guided matching loop: repeatedly turn the
//! rotated image by a small step in the direction commanded by the total
//! moment until a balance point is reached.
//!
//! The working image at cumulative correction `c` is always produced by
//! a single rotation of the pristine `rotated` input, never by
//! resampling the previous iterate, so the trajectory is a pure function
//! of the inputs and parameters.

use std::fs;
use std::path::Path;

use crate::edgecurrent::{extract_current_set, EdgeParams};
use crate::emfield::{moment_sign, total_moment, SceneConfig};
use crate::error::{Error, Result};
use crate::raster::{mask_circle, normalize_angle, rotate_image, GrayImage, RotationSpec};

/// Matching-loop parameters.
#[derive(Debug, Clone, Copy)]
pub struct MatchParams {
    /// Degrees turned per iteration. The oscillation stop makes the
    /// final accuracy +/- 2 steps by construction.
    pub step_degrees: f64,
    pub max_iterations: usize,
    /// Number of trailing strictly-alternating signs counted as balance.
    pub oscillation_window: usize,
    /// Moments with `|m| <= zero_band` stop the loop immediately (no
    /// direction is commanded).
    pub zero_band: f64,
    pub scene: SceneConfig,
    pub edge_params: EdgeParams,
    pub fill: f64,
    pub mask_circle: bool,
    /// Balance classification: the corrected image counts as an origin
    /// match when its mean absolute difference from the original over
    /// the inscribed circle is below this fraction of the original's
    /// intensity range.
    pub origin_residual_threshold: f64,
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            step_degrees: 1.0,
            max_iterations: 720,
            oscillation_window: 4,
            zero_band: 0.0,
            scene: SceneConfig::default(),
            edge_params: EdgeParams::default(),
            fill: 0.0,
            mask_circle: false,
            origin_residual_threshold: 0.15,
        }
    }
}

impl MatchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_degrees > 0.0 && self.step_degrees <= 90.0) {
            return Err(Error::InvalidParam(format!(
                "step_degrees must be in (0, 90], got {}",
                self.step_degrees
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParam("max_iterations must be >= 1".into()));
        }
        if self.oscillation_window < 2 {
            return Err(Error::InvalidParam(
                "oscillation_window must be >= 2".into(),
            ));
        }
        self.edge_params.validate()?;
        self.scene.validate()
    }
}

/// Kind of balance the loop terminated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BalanceKind {
    /// The corrected image matches the original: zero-deviation balance.
    Origin,
    /// A locally balanced point away from the origin (an oscillating
    /// angle of the sign distribution).
    Local,
}

/// One step of the matching loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    /// Rotation currently applied to the `rotated` input, degrees in
    /// `[0, 360)`, clockwise positive.
    pub angle_deg: f64,
    pub moment: f64,
    pub sign: i8,
}

/// Outcome of [`match_rotation`].
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub trajectory: Vec<TrajectoryPoint>,
    /// Estimated clockwise rotation of `rotated` relative to `original`
    /// (the negated cumulative correction), degrees in `[0, 360)`.
    pub final_angle: f64,
    /// Whether a balance point was reached before `max_iterations`.
    pub converged: bool,
    pub balance_kind: BalanceKind,
    /// Image residual of the final corrected image against the
    /// original, as a fraction of the original's intensity range.
    pub residual: f64,
}

fn trailing_signs_alternate(trajectory: &[TrajectoryPoint], window: usize) -> bool {
    if trajectory.len() < window {
        return false;
    }
    let tail = &trajectory[trajectory.len() - window..];
    tail.iter().all(|p| p.sign != 0)
        && tail.windows(2).all(|w| w[0].sign == -w[1].sign)
}

/// Runs the moment-guided loop: extract currents of both images
/// (original cached, working image re-extracted each iteration), apply
/// the pairwise force and total moment, and turn the working image one
/// step per iteration — negative moment turns it visually
/// counterclockwise, positive clockwise. Stops on a zero-band moment,
/// on `oscillation_window` alternating signs, or at `max_iterations`.
pub fn match_rotation(
    original: &GrayImage,
    rotated: &GrayImage,
    params: &MatchParams,
) -> Result<MatchResult> {
    params.validate()?;
    if original.width() != rotated.width() || original.height() != rotated.height() {
        return Err(Error::InvalidImage(format!(
            "image dimensions differ: {}x{} vs {}x{}",
            original.width(),
            original.height(),
            rotated.width(),
            rotated.height()
        )));
    }
    let prepare = |img: &GrayImage| -> GrayImage {
        if params.mask_circle {
            mask_circle(img, params.fill)
        } else {
            img.clone()
        }
    };
    let original_prepared = prepare(original);
    let original_set = extract_current_set(&original_prepared, &params.edge_params, 0.0)?;
    if original_set.is_empty() {
        return Err(Error::EmptyCurrentSet { angle_deg: None });
    }

    let mut cumulative = 0.0f64; // clockwise turn applied to `rotated`
    let mut trajectory: Vec<TrajectoryPoint> = Vec::new();
    let mut converged = false;
    let mut working = rotated.clone();

    for iteration in 0..params.max_iterations {
        let applied = normalize_angle(cumulative);
        working = if applied == 0.0 {
            rotated.clone()
        } else {
            rotate_image(rotated, &RotationSpec::new(applied).with_fill(params.fill))
        };
        let working_set = extract_current_set(
            &prepare(&working),
            &params.edge_params,
            params.scene.z_separation,
        )?;
        if working_set.is_empty() {
            return Err(Error::EmptyCurrentSet {
                angle_deg: Some(applied),
            });
        }
        let moment = total_moment(&working_set, &original_set, &params.scene).total;
        let sign = moment_sign(moment, params.zero_band);
        trajectory.push(TrajectoryPoint {
            iteration,
            angle_deg: applied,
            moment,
            sign,
        });
        if sign == 0 || trailing_signs_alternate(&trajectory, params.oscillation_window) {
            converged = true;
            break;
        }
        cumulative += if sign > 0 {
            params.step_degrees
        } else {
            -params.step_degrees
        };
    }

    // Classify the balance by comparing the final corrected image with
    // the original: the moment alone cannot tell the origin from an
    // interior locally balanced angle.
    let range = intensity_range(original);
    let residual = original.mean_abs_diff_inscribed(&working) / range;
    let balance_kind = if residual <= params.origin_residual_threshold {
        BalanceKind::Origin
    } else {
        BalanceKind::Local
    };

    Ok(MatchResult {
        trajectory,
        final_angle: normalize_angle(-cumulative),
        converged,
        balance_kind,
        residual,
    })
}

fn intensity_range(img: &GrayImage) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in img.pixels() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (hi - lo).max(1.0)
}

/// The user-facing answer: the estimated clockwise rotation of `rotated`
/// relative to `original`, in `[0, 360)`. Errors when the loop did not
/// converge or stalled at a local balance; both errors carry the full
/// [`MatchResult`] for diagnosis.
pub fn estimate_rotation(
    original: &GrayImage,
    rotated: &GrayImage,
    params: &MatchParams,
) -> Result<f64> {
    let result = match_rotation(original, rotated, params)?;
    if !result.converged {
        return Err(Error::NoConvergence {
            result: Box::new(result),
        });
    }
    if result.balance_kind == BalanceKind::Local {
        return Err(Error::LocalBalance {
            result: Box::new(result),
        });
    }
    Ok(result.final_angle)
}

/// Deviation of `candidate` from `original` estimated purely in image
/// space: the clockwise rotation of `original` (sampled on a
/// `grid_step`-degree grid) minimizing the mean absolute difference over
/// the inscribed circle. Used to diagnose local balances.
pub fn deviation_by_image_residual(
    original: &GrayImage,
    candidate: &GrayImage,
    grid_step: f64,
) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    let mut angle = 0.0;
    while angle < 360.0 {
        let turned = rotate_image(original, &RotationSpec::new(angle));
        let diff = turned.mean_abs_diff_inscribed(candidate);
        if diff < best.0 {
            best = (diff, angle);
        }
        angle += grid_step;
    }
    best.1
}

/// Trajectory CSV: header `iteration,angle_deg,moment,sign`.
pub fn write_trajectory_csv(result: &MatchResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("iteration,angle_deg,moment,sign\n");
    for p in &result.trajectory {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.iteration, p.angle_deg, p.moment, p.sign
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn rotated_copy(img: &GrayImage, clockwise_deg: f64) -> GrayImage {
        rotate_image(img, &RotationSpec::new(clockwise_deg))
    }

    #[test]
    fn zero_deviation_balances_immediately_at_origin() {
        let img = synth::centered_rect(32, 17.4, 9.4);
        let params = MatchParams {
            scene: SceneConfig {
                z_separation: 10.0,
                ..SceneConfig::default()
            },
            ..MatchParams::default()
        };
        let result = match_rotation(&img, &img.clone(), &params).unwrap();
        assert!(result.converged);
        assert_eq!(result.balance_kind, BalanceKind::Origin);
        let final_dev = result.final_angle.min(360.0 - result.final_angle);
        assert!(
            final_dev <= params.step_degrees,
            "final angle {}",
            result.final_angle
        );
    }

    #[test]
    fn recovers_ten_degree_clockwise_rotation_coplanar() {
        let img = synth::centered_rect(32, 17.4, 9.4);
        let rotated = rotated_copy(&img, 10.0);
        let params = MatchParams::default();
        let estimate = estimate_rotation(&img, &rotated, &params).unwrap();
        assert!(
            (estimate - 10.0).abs() <= 2.0 * params.step_degrees,
            "estimate {estimate}"
        );
    }

    #[test]
    fn trajectory_moves_by_one_step_in_commanded_direction() {
        let img = synth::centered_rect(32, 17.4, 9.4);
        let rotated = rotated_copy(&img, 8.0);
        let result = match_rotation(&img, &rotated, &MatchParams::default()).unwrap();
        assert!(result.converged);
        for w in result.trajectory.windows(2) {
            let diff = normalize_angle(w[1].angle_deg - w[0].angle_deg);
            let moved = diff.min(360.0 - diff);
            assert!((moved - 1.0).abs() < 1e-9, "step size {moved}");
            // Negative moment turns counterclockwise: applied clockwise
            // angle decreases (mod 360).
            let expected = if w[0].sign < 0 { 359.0 } else { 1.0 };
            assert!((diff - expected).abs() < 1e-9, "direction mismatch");
        }
    }

    #[test]
    fn determinism_identical_runs() {
        let img = synth::centered_rect(32, 17.4, 9.4);
        let rotated = rotated_copy(&img, 12.0);
        let a = match_rotation(&img, &rotated, &MatchParams::default()).unwrap();
        let b = match_rotation(&img, &rotated, &MatchParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn blank_image_reports_empty_current_set() {
        let img = GrayImage::filled(32, 32, 5.0).unwrap();
        let shape = synth::centered_rect(32, 17.4, 9.4);
        assert!(matches!(
            match_rotation(&shape, &img, &MatchParams::default()),
            Err(Error::EmptyCurrentSet { .. })
        ));
        assert!(matches!(
            match_rotation(&img, &shape, &MatchParams::default()),
            Err(Error::EmptyCurrentSet { angle_deg: None })
        ));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = synth::centered_rect(32, 17.4, 9.4);
        let b = synth::centered_rect(24, 12.4, 7.4);
        assert!(match_rotation(&a, &b, &MatchParams::default()).is_err());
    }

    #[test]
    fn non_convergence_keeps_trajectory() {
        let img = synth::centered_rect(32, 17.4, 9.4);
        let rotated = rotated_copy(&img, 40.0);
        let params = MatchParams {
            max_iterations: 5,
            ..MatchParams::default()
        };
        let err = estimate_rotation(&img, &rotated, &params).unwrap_err();
        match err {
            Error::NoConvergence { result } => {
                assert_eq!(result.trajectory.len(), 5);
                assert!(!result.converged);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn image_residual_deviation_estimate() {
        let img = synth::centered_rect(48, 23.4, 13.4);
        let turned = rotated_copy(&img, 25.0);
        let dev = deviation_by_image_residual(&img, &turned, 1.0);
        assert!((dev - 25.0).abs() <= 1.0, "estimated deviation {dev}");
    }

    #[test]
    fn trajectory_csv_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        let result = MatchResult {
            trajectory: vec![
                TrajectoryPoint {
                    iteration: 0,
                    angle_deg: 0.0,
                    moment: -2.5,
                    sign: -1,
                },
                TrajectoryPoint {
                    iteration: 1,
                    angle_deg: 359.0,
                    moment: 1.25,
                    sign: 1,
                },
            ],
            final_angle: 1.0,
            converged: true,
            balance_kind: BalanceKind::Origin,
            residual: 0.01,
        };
        write_trajectory_csv(&result, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "iteration,angle_deg,moment,sign\n0,0,-2.5,-1\n1,359,1.25,1\n"
        );
    }
}
