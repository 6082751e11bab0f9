use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse error classes. Each class maps to one process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Schema,
    Geometry,
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Usage => 2,
            ErrorClass::Schema => 3,
            ErrorClass::Geometry => 4,
            ErrorClass::Io => 5,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("point is behind the camera (z = {depth:e})")]
    BehindCamera { depth: f64 },
    #[error("perspective divide by zero (z = {depth:e})")]
    DivideByZero { depth: f64 },
    #[error("scale factor must be positive, got {0}")]
    InvalidScale(f64),
    #[error("invalid rotation: {0}")]
    InvalidRotation(String),
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("no pose hypothesis places points in front of both cameras")]
    NoValidHypothesis,
    #[error("best model has only {inliers} inliers (need {needed})")]
    InsufficientInliers { inliers: usize, needed: usize },
    #[error("pose refinement failed to converge: {0}")]
    NoConvergence(String),
    #[error("rays are parallel or baseline is zero")]
    ParallelRays,
    #[error("every landmark is behind the camera{}", frame_suffix(*.frame))]
    AllBehindCamera { frame: Option<usize> },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("count mismatch: expected {expected}, found {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("normalization failed: {0}")]
    NormalizationFailure(String),
    #[error("invalid motion magnitude {0}")]
    InvalidMagnitude(f64),
    #[error("invalid keyframes: {0}")]
    InvalidKeyframes(String),
    #[error("unknown motion '{0}'")]
    UnknownMotion(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("invalid offset: {0}")]
    InvalidOffset(String),
    #[error("image dimension is zero")]
    ZeroDimension,
    #[error("no clips to stitch")]
    TooFewClips,
    #[error("clip {index} has {len} frames; at least 2 are needed")]
    ClipTooShort { index: usize, len: usize },
    #[error("{frame} frame has {visible} visible landmarks; at least {needed} are needed")]
    InsufficientLandmarks {
        frame: &'static str,
        visible: usize,
        needed: usize,
    },
    #[error("pose estimation failed on {frame} frame: {source}")]
    FramePose {
        frame: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("image error for {}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

fn frame_suffix(frame: Option<usize>) -> String {
    match frame {
        Some(i) => format!(" (frame {i})"),
        None => String::new(),
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            UnknownMotion(_) | InvalidScale(_) | InvalidMagnitude(_) | InvalidRange(_)
            | InvalidOffset(_) | Config(_) | InvalidKeyframes(_) => ErrorClass::Usage,
            Schema(_) | CountMismatch { .. } | NormalizationFailure(_) | DimensionMismatch(_)
            | ZeroDimension | TooFewClips | ClipTooShort { .. } | InvalidIntrinsics(_) => {
                ErrorClass::Schema
            }
            Io { .. } | Image { .. } => ErrorClass::Io,
            FramePose { source, .. } => source.class(),
            BehindCamera { .. } | DivideByZero { .. } | InvalidRotation(_) | Degenerate(_)
            | InsufficientPoints { .. } | NoValidHypothesis | InsufficientInliers { .. }
            | NoConvergence(_) | ParallelRays | AllBehindCamera { .. }
            | InsufficientLandmarks { .. } => ErrorClass::Geometry,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn schema(msg: impl std::fmt::Display) -> Self {
        Error::Schema(msg.to_string())
    }
}
