use std::path::PathBuf;

use crate::matcher::MatchResult;

/// Errors produced by the emmatch pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported or malformed image file: {0}")]
    Format(String),

    #[error("image too small: {width}x{height} (need at least 3x3)")]
    TooSmall { width: usize, height: usize },

    #[error("invalid image data: {0}")]
    InvalidImage(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// No current elements survive edge extraction. When the image was a
    /// rotated variant produced inside a sweep or match loop, `angle_deg`
    /// names the rotation at which extraction came up empty.
    #[error("empty current set{}", match angle_deg {
        Some(a) => format!(" at rotation angle {a}\u{b0}"),
        None => String::new(),
    })]
    EmptyCurrentSet { angle_deg: Option<f64> },

    #[error("matcher did not converge within {} iterations", result.trajectory.len())]
    NoConvergence { result: Box<MatchResult> },

    #[error("matcher stalled at a local balance (no global match); correction so far {:.1}\u{b0}", result.final_angle)]
    LocalBalance { result: Box<MatchResult> },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
