//! Rotation matching of grayscale images through virtual electromagnetic
//! interaction.
//!
//! The pipeline: significant edge lines are extracted from each image
//! and turned into a set of discrete current elements (gradient-strength
//! vectors running along the edges). One image's current exerts a
//! pairwise force on every element of the other's; the signed total
//! moment of those forces about the image center tells which way the
//! second image must turn to line up with the first. On top of the
//! kernels sit a sign-distribution analysis over a full turn of rotation
//! angles and an iterative matcher that follows the moment's sign to the
//! balance angle.
//!
//! # Modules
//! - [`raster`]: grayscale images, PGM/PPM I/O, center rotation.
//! - [`edgecurrent`]: Sobel gradients, significant-edge selection,
//!   gradient-to-current conversion.
//! - [`emfield`]: pairwise force and moment kernels (the `O(N^2)` core).
//! - [`analysis`]: moment-sign sweeps, sections, convergence ranges,
//!   oscillating angles, diagrams.
//! - [`matcher`]: the iterative moment-guided matching loop.
//! - [`viz`]: arrow-glyph and CSV debug exports.
//! - [`synth`]: synthetic test shapes.
//!
//! # Feature flags
//! - `parallel` (default): rayon-backed data-parallel kernels and
//!   sweeps, selected per call through
//!   [`emfield::ExecMode::Parallel`]. Disabling the feature makes every
//!   mode run the sequential deterministic path.

pub mod analysis;
pub mod edgecurrent;
pub mod emfield;
mod error;
mod geom;
pub mod matcher;
pub mod raster;
pub mod synth;
pub mod viz;

pub use error::{Error, Result};
