use thiserror::Error;

/// Everything that can go wrong inside the laboratory.
#[derive(Debug, Error)]
pub enum MagflowError {
    #[error("root finding failed: {0}")]
    RootFindingFailure(String),
    #[error("expected {expected} critical points, found {found}")]
    WrongCount { expected: usize, found: usize },
    #[error("point is not strictly hyperbolic: {0}")]
    NotHyperbolic(String),
    #[error("grid too small: {nx}x{ny} (need at least 8 in each direction)")]
    GridTooSmall { nx: usize, ny: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("finite-difference step too large: {0}")]
    StepTooLarge(String),
    #[error("kernel dimension {found}, expected {expected}")]
    KernelDimensionUnexpected { expected: usize, found: usize },
    #[error("epsilon {eps} exceeds bound {max}")]
    EpsilonTooLarge { eps: f64, max: f64 },
    #[error("newton iteration failed: {0}")]
    NewtonFailure(String),
    #[error("critical point within tolerance of a vertical direction (±i): {0}")]
    NearVerticalCritical(String),
    #[error("newton inversion diverged: {0}")]
    NewtonDivergence(String),
    #[error("critical points reordered inside the chart: {0}")]
    BranchCrossing(String),
    #[error("characteristic speeds collide: {0}")]
    SpeedCollision(String),
    #[error("characteristic direction is vertical: {0}")]
    NearVertical(String),
    #[error("metric factor became non-positive at ({x}, {y})")]
    BlowUp { x: f64, y: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl MagflowError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            MagflowError::Parse { .. }
            | MagflowError::Validation(_)
            | MagflowError::GridTooSmall { .. }
            | MagflowError::GridMismatch(_)
            | MagflowError::WrongCount { .. }
            | MagflowError::EpsilonTooLarge { .. } => 1,
            MagflowError::Io(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, MagflowError>;
