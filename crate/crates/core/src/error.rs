use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite loss or gradient at step {step}")]
    NonFiniteStep { step: usize },

    #[error("waypoint {segment}: {source}")]
    Segment {
        segment: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("basis rows are not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("optima are affinely dependent")]
    AffinelyDependent,

    #[error("center not in a low-loss region: loss {loss} >= threshold {threshold}")]
    CenterNotLowLoss { loss: f64, threshold: f64 },

    #[error("exact short-direction counting needs a toy wedge landscape")]
    MethodMismatch,

    #[error("dimension {dim} exceeds the finite-difference cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the numerics (diverging loss, NaN
    /// gradients) rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonFiniteStep { .. } | Error::NonFinite { .. } => true,
            Error::Segment { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn in_segment(self, segment: usize) -> Error {
        Error::Segment {
            segment,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}
