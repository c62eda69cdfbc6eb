//! The numerical core: virtual magnetic field of a current set, pairwise
//! forces between two current sets, and moments about the image center.
//!
//! For a receiving element with current vector `t1` at position `p1`
//! (lifted to its plane height) and a source element `(t2, p2)`, the raw
//! force contribution is `A * [t1 x (t2 x r)] / |r|^3` with
//! `r = p1 - p2`; only the in-plane (x, y) components are kept. Pairs
//! closer than `min_distance` are skipped, which keeps coplanar sums
//! finite without affecting any separated pair.
//!
//! Moment sign contract (screen coordinates, x right, y down): the
//! scalar moment of a force `f` applied at `p` about origin `o` is
//! `m = rx*fy - ry*fx` with `(rx, ry) = p - o`. A NEGATIVE total moment
//! drives visually counterclockwise rotation, a POSITIVE one clockwise.
//!
//! Summation order: `Deterministic` mode accumulates set1 elements in
//! storage (row-major) order with the inner set2 sum in storage order,
//! giving bit-reproducible results. `Parallel` mode (with the `parallel`
//! feature) distributes the outer loop over threads; inner per-element
//! sums keep their fixed order, so per-element forces are identical and
//! only the final reduction may reassociate, staying within relative
//! 1e-6 of deterministic totals.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::edgecurrent::CurrentSet;
use crate::error::{Error, Result};
use crate::geom::{cross2, cross3, dot3};

/// How the pairwise kernels execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    /// Fixed accumulation order; bit-reproducible.
    #[default]
    Deterministic,
    /// Data-parallel outer loop. Falls back to the sequential path when
    /// the `parallel` feature is disabled.
    Parallel,
}

/// Scene parameters for the force and moment kernels.
#[derive(Debug, Clone, Copy)]
pub struct SceneConfig {
    /// Force prefactor `A` (absorbs the physical constant). Only the
    /// moment's sign matters to the matcher, so the default is 1.
    pub force_constant: f64,
    /// Plane distance between the two current sets, in pixels. Scene
    /// builders place the acted-on set at `z = z_separation` and the
    /// source set at `z = 0`; the kernels read each set's own `z`.
    pub z_separation: f64,
    /// Pairs closer than this are skipped.
    pub min_distance: f64,
    pub exec: ExecMode,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            force_constant: 1.0,
            z_separation: 0.0,
            min_distance: 1e-6,
            exec: ExecMode::Deterministic,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.force_constant > 0.0) {
            return Err(Error::InvalidParam(format!(
                "force_constant must be positive, got {}",
                self.force_constant
            )));
        }
        if !(self.min_distance > 0.0) {
            return Err(Error::InvalidParam(format!(
                "min_distance must be positive, got {}",
                self.min_distance
            )));
        }
        if !(self.z_separation >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "z_separation must be non-negative, got {}",
                self.z_separation
            )));
        }
        Ok(())
    }

    #[inline]
    fn effective_exec(&self) -> ExecMode {
        #[cfg(feature = "parallel")]
        {
            self.exec
        }
        #[cfg(not(feature = "parallel"))]
        {
            ExecMode::Deterministic
        }
    }
}

/// In-plane force on one element of the acted-on set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceSample {
    pub element_index: usize,
    pub force: [f64; 2],
}

/// Total moment (z-component) and optional per-element contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentResult {
    pub total: f64,
    pub per_element: Option<Vec<f64>>,
}

/// Magnetic field vector at a 3D point generated by a whole current set:
/// the sum over elements of `vec_k x r / |r|^3` with `r` from the lifted
/// element position to the point, scaled by `force_constant`. Elements
/// within `min_distance` of the point are skipped.
pub fn field_at(point: [f64; 3], source: &CurrentSet, cfg: &SceneConfig) -> [f64; 3] {
    let min2 = cfg.min_distance * cfg.min_distance;
    let mut acc = [0.0; 3];
    for e in &source.elements {
        let r = [
            point[0] - e.pos[0],
            point[1] - e.pos[1],
            point[2] - source.z,
        ];
        let r2 = dot3(r, r);
        if r2 < min2 {
            continue;
        }
        let inv_r3 = 1.0 / (r2 * r2.sqrt());
        let db = cross3([e.vec[0], e.vec[1], 0.0], r);
        acc[0] += db[0] * inv_r3;
        acc[1] += db[1] * inv_r3;
        acc[2] += db[2] * inv_r3;
    }
    [
        acc[0] * cfg.force_constant,
        acc[1] * cfg.force_constant,
        acc[2] * cfg.force_constant,
    ]
}

/// In-plane force components on element `index` of `set1` from all
/// elements of `set2`, accumulated in set2 storage order.
#[inline]
fn in_plane_force(
    pos: [f64; 2],
    vec: [f64; 2],
    z1: f64,
    set2: &CurrentSet,
    cfg: &SceneConfig,
) -> [f64; 2] {
    let min2 = cfg.min_distance * cfg.min_distance;
    let dz = z1 - set2.z;
    let t1 = [vec[0], vec[1], 0.0];
    let mut fx = 0.0;
    let mut fy = 0.0;
    for e2 in &set2.elements {
        let r = [pos[0] - e2.pos[0], pos[1] - e2.pos[1], dz];
        let r2 = dot3(r, r);
        if r2 < min2 {
            continue;
        }
        let inv_r3 = 1.0 / (r2 * r2.sqrt());
        let inner = cross3([e2.vec[0], e2.vec[1], 0.0], r);
        let f = cross3(t1, inner);
        fx += f[0] * inv_r3;
        fy += f[1] * inv_r3;
    }
    [fx * cfg.force_constant, fy * cfg.force_constant]
}

/// Force on one element of `set1` from the whole of `set2`; the raw
/// force's z-component is discarded.
pub fn force_on_element(
    set1: &CurrentSet,
    index: usize,
    set2: &CurrentSet,
    cfg: &SceneConfig,
) -> ForceSample {
    let e = &set1.elements[index];
    ForceSample {
        element_index: index,
        force: in_plane_force(e.pos, e.vec, set1.z, set2, cfg),
    }
}

/// Force on every element of `set1` from `set2`, indexed like
/// `set1.elements`. Per-element values are identical in both execution
/// modes; only the loop scheduling differs.
pub fn force_field(set1: &CurrentSet, set2: &CurrentSet, cfg: &SceneConfig) -> Vec<ForceSample> {
    let one = |(index, e): (usize, &crate::edgecurrent::CurrentElement)| ForceSample {
        element_index: index,
        force: in_plane_force(e.pos, e.vec, set1.z, set2, cfg),
    };
    match cfg.effective_exec() {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => set1.elements.par_iter().enumerate().map(one).collect(),
        _ => set1.elements.iter().enumerate().map(one).collect(),
    }
}

/// Signed scalar moment (z-component) of an in-plane force about
/// `origin`: `rx*fy - ry*fx`. Negative drives visually counterclockwise
/// rotation on screen.
#[inline]
pub fn moment_of_force(application_point: [f64; 2], force: [f64; 2], origin: [f64; 2]) -> f64 {
    cross2(
        [
            application_point[0] - origin[0],
            application_point[1] - origin[1],
        ],
        force,
    )
}

#[inline]
fn element_moment(set1: &CurrentSet, index: usize, set2: &CurrentSet, cfg: &SceneConfig) -> f64 {
    let e = &set1.elements[index];
    let f = in_plane_force(e.pos, e.vec, set1.z, set2, cfg);
    moment_of_force(e.pos, f, set1.center)
}

/// Total moment on `set1` from `set2` about `set1.center`.
pub fn total_moment(set1: &CurrentSet, set2: &CurrentSet, cfg: &SceneConfig) -> MomentResult {
    let total = match cfg.effective_exec() {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => (0..set1.len())
            .into_par_iter()
            .map(|j| element_moment(set1, j, set2, cfg))
            .sum(),
        _ => (0..set1.len())
            .map(|j| element_moment(set1, j, set2, cfg))
            .sum(),
    };
    MomentResult {
        total,
        per_element: None,
    }
}

/// Like [`total_moment`] but keeps the per-element contributions; the
/// total is their sum in element order in both execution modes.
pub fn total_moment_detailed(
    set1: &CurrentSet,
    set2: &CurrentSet,
    cfg: &SceneConfig,
) -> MomentResult {
    let per: Vec<f64> = match cfg.effective_exec() {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => (0..set1.len())
            .into_par_iter()
            .map(|j| element_moment(set1, j, set2, cfg))
            .collect(),
        _ => (0..set1.len())
            .map(|j| element_moment(set1, j, set2, cfg))
            .collect(),
    };
    MomentResult {
        total: per.iter().sum(),
        per_element: Some(per),
    }
}

/// Sign of a moment under the zero-band rule: 0 when `|m| <= zero_band`.
#[inline]
pub fn moment_sign(moment: f64, zero_band: f64) -> i8 {
    if moment.abs() <= zero_band {
        0
    } else if moment < 0.0 {
        -1
    } else {
        1
    }
}

/// Caps the number of worker threads used by `Parallel` mode. No-op
/// without the `parallel` feature or after a pool already exists.
pub fn configure_threads(threads: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(())
    }
}
