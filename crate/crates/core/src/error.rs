use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("period must be positive and finite, got {0}")]
    InvalidPeriod(f64),
    #[error("sampling period must be positive and finite, got {0}")]
    InvalidTau(f64),
    #[error("a sample train needs at least 2 samples, got {0}")]
    TrainTooShort(usize),
    #[error("table model needs at least {min} samples per period, got {len}")]
    TableTooShort { len: usize, min: usize },
    #[error("signal model has no terms")]
    EmptyModel,
    #[error("signal model contains non-finite values")]
    NonFinite,
    #[error("malformed signal document: {0}")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("noise standard deviation must be non-negative, got {0}")]
    InvalidNoise(f64),
    #[error("quantization step must be non-negative, got {0}")]
    InvalidQuantization(f64),
    #[error("cloud must contain at least one point")]
    EmptyCloud,
    #[error("points have inconsistent dimension: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Signal(#[from] SignalError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("too few points to infer a closed curve ({0})")]
    TooFewPoints(usize),
    #[error("chain endpoints are {gap:.4} apart, more than 2R = {limit:.4}; R too large or too few points")]
    NotClosed { gap: f64, limit: f64 },
    #[error("point cloud splits into {0} separate chains")]
    MultipleComponents(usize),
    #[error("polygonal chain is not closed")]
    ChainNotClosed,
    #[error("closed chain needs at least 4 nodes (including the repeated first node), got {0}")]
    ChainTooShort(usize),
    #[error("chain has repeated consecutive nodes at index {0}")]
    RepeatedNode(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("no cloud points within R of chain node {0}; R too small for this n")]
    EmptyNeighborhood(usize),
    #[error("density vanishes on an arc of relative width {width:.3e} (grid resolution {resolution:.3e})")]
    NonInvertible { width: f64, resolution: f64 },
    #[error("invalid density profile: {0}")]
    InvalidProfile(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("objective has two distinct minima at x0 = {first:.6} and {second:.6} within {gap:.3e} of each other")]
    AmbiguousMinimum { first: f64, second: f64, gap: f64 },
    #[error("invalid solver input: {0}")]
    InvalidInput(String),
}

/// Stage of the reconstruction pipeline that produced an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Curve,
    Density,
    Offset,
    Assembly,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Curve => "curve",
            Stage::Density => "density",
            Stage::Offset => "offset",
            Stage::Assembly => "assembly",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StageError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

/// A failure inside [`crate::pipeline::reconstruct`], tagged with its stage.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{stage} stage failed: {source}")]
pub struct ReconstructError {
    pub stage: Stage,
    pub source: StageError,
}

impl ReconstructError {
    pub fn new(stage: Stage, source: impl Into<StageError>) -> Self {
        Self {
            stage,
            source: source.into(),
        }
    }
}

/// Errors of file-format readers and writers.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid experiment configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
}
