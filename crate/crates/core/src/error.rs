use thiserror::Error;

/// Errors produced by the geometry, rendering, pose and evaluation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("matrix is not a proper rotation (orthonormality residual {residual:.3e}, det {det:.6})")]
    NotARotation { residual: f64, det: f64 },
    #[error("invalid bounding box: {0}")]
    InvalidBox(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("render covered no pixels")]
    EmptyRender,
    #[error("no pixel is valid in the NOCS map, the depth map and the mask at once")]
    NoCorrespondences,
    #[error("RANSAC found no consensus: best model has {best} inliers, {required} required")]
    NoConsensus { best: usize, required: usize },
    #[error("rendered depth is invalid at pixel ({u}, {v})")]
    PixelNotCovered { u: usize, v: usize },
    #[error("no ground-truth instances to evaluate against")]
    EmptyGroundTruth,
    #[error("no pixel is valid in both depth maps")]
    NoValidPixels,
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("face index {index} out of range at line {line} ({count} vertices)")]
    IndexOutOfRange { line: usize, index: i64, count: usize },
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::NotARotation { .. } => "NotARotation",
            Error::InvalidBox(_) => "InvalidBox",
            Error::InvalidInput(_) => "InvalidInput",
            Error::EmptyRender => "EmptyRender",
            Error::NoCorrespondences => "NoCorrespondences",
            Error::NoConsensus { .. } => "NoConsensus",
            Error::PixelNotCovered { .. } => "PixelNotCovered",
            Error::EmptyGroundTruth => "EmptyGroundTruth",
            Error::NoValidPixels => "NoValidPixels",
            Error::UnknownCategory(_) => "UnknownCategory",
            Error::Parse { .. } => "ParseError",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::Format(_) => "FormatError",
            Error::Io(_) => "IoError",
            Error::Json(_) => "JsonError",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
