use std::fmt;

use crate::raster::{GridShape, Pixel};

/// Errors produced by the refinement engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: GridShape, right: GridShape },

    #[error("pixel {pixel} is outside a {shape} grid")]
    OutOfBounds { pixel: Pixel, shape: GridShape },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("malformed {kind} data: {reason}")]
    Format { kind: FormatKind, reason: String },

    #[error("likelihood provider failed at iteration {iteration}: {reason}")]
    Provider { iteration: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatKind {
    Pgm,
    Pfm,
    ProviderSpec,
    List,
}

impl fmt::Display for FormatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormatKind::Pgm => "PGM",
            FormatKind::Pfm => "PFM",
            FormatKind::ProviderSpec => "provider spec",
            FormatKind::List => "list",
        })
    }
}

impl Error {
    pub(crate) fn format(kind: FormatKind, reason: impl Into<String>) -> Self {
        Error::Format {
            kind,
            reason: reason.into(),
        }
    }

    pub fn ensure_same_shape(left: GridShape, right: GridShape) -> Result<()> {
        if left == right {
            Ok(())
        } else {
            Err(Error::ShapeMismatch { left, right })
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
