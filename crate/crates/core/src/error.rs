use thiserror::Error;

pub type Result<T, E = DilationError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DilationError {
    #[error("grid denominator must be positive, got {0}")]
    InvalidGrid(i64),
    #[error("value {0} is not on the grid")]
    OffGrid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid step function: {0}")]
    InvalidStepFunction(String),
    #[error("multiplicity mismatch: {0} vs {1}")]
    MultiplicityMismatch(usize, usize),
    #[error("domain mismatch: ({0}, {1}] vs ({2}, {3}]")]
    DomainMismatch(String, String, String, String),
    #[error("domain must start at 0, starts at {0}")]
    DomainNotAtZero(String),
    #[error("split point {point} outside ({lo}, {hi})")]
    SplitOutOfRange { point: String, lo: String, hi: String },
    #[error("fiber mismatch: expected {expected}, got {got}")]
    FiberMismatch { expected: String, got: String },
    #[error("generator norm {norm:.6} exceeds bound {bound}")]
    NormBound { norm: f64, bound: f64 },
    #[error("parameter must be positive, got {0}")]
    NonPositive(String),
    #[error("fiber index {0} must be a positive integer in the discrete model")]
    NonIntegerFiber(String),
    #[error("shift index: alpha {0} outside (0, 1]")]
    AlphaOutOfRange(String),
    #[error("interval ({0}, {1}] is not a nonempty subinterval of (0, 1]")]
    BadInterval(String, String),
    #[error("orientation mismatch")]
    OrientationMismatch,
    #[error("level {level} exceeds cap {cap}")]
    LevelCap { level: u32, cap: u32 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("frame built for t = {frame} used at t = {requested}")]
    FrameMismatch { frame: String, requested: String },
    #[error("frame Gram condition {condition:.3e} exceeds limit {limit:.1e} ({size} generators, min retained eigenvalue {min_eig:.3e})")]
    IllConditionedFrame { condition: f64, limit: f64, size: usize, min_eig: f64 },
    #[error("empty frame")]
    EmptyFrame,
    #[error("probe grid must be strictly increasing")]
    ProbeGrid,
}
