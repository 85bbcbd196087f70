use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("zero image dimensions")]
    ZeroDimensions,
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("point at infinity")]
    PointAtInfinity,
    #[error("footprint out of bounds at ({x}, {y})")]
    OutOfBounds { x: f64, y: f64 },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("descriptor geometry mismatch")]
    GeometryMismatch,
    #[error("degenerate similarity surface: all scores equal")]
    DegenerateSurface,
    #[error("insufficient points: need {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("degenerate point configuration")]
    DegenerateConfiguration,
    #[error("refinement cannot reach rmse {threshold} px before dropping below {min_points} points")]
    RefinementFailed { threshold: f64, min_points: usize },
    #[error("too few control points: {0}")]
    TooFewControlPoints(usize),
    #[error("no matches to evaluate")]
    NoMatches,
    #[error("empty response stack")]
    EmptyStack,
    #[error("csv error: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;
