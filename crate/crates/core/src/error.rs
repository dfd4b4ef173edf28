use std::path::PathBuf;

use thiserror::Error;

use crate::solver::LeafResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} lies inside the excluded interior (|x| = {radius} < r_min = {r_min})")]
    PointInsideChart { point: [f64; 3], radius: f64, r_min: f64 },

    #[error("point {0:?} hits the singular center of the metric family")]
    SingularPoint([f64; 3]),

    #[error("metric is degenerate at {point:?} (det = {det:e})")]
    DegenerateMetric { point: [f64; 3], det: f64 },

    #[error("extrinsic curvature is not available for this metric field")]
    MissingExtrinsicData,

    #[error("finite-difference stencil leaves the chart at {0:?}")]
    StencilOutsideChart([f64; 3]),

    #[error("decay audit needs at least 3 radii spanning a factor 4 (got {count} radii, ratio {ratio})")]
    InsufficientRadii { count: usize, ratio: f64 },

    #[error("non-finite value in input field at index {0}")]
    NonFiniteInput(usize),

    #[error("band limit mismatch: coefficients have L = {coeffs}, grid supports L = {grid}")]
    BandLimitMismatch { coeffs: usize, grid: usize },

    #[error("surface is not an embedded radial graph: {0}")]
    NonEmbedded(String),

    #[error("induced metric degenerates at node {node} (det = {det:e})")]
    DegenerateFirstForm { node: usize, det: f64 },

    #[error("eigen solver failed: {0}")]
    EigSolverFailure(String),

    #[error("l = 1 content of the approximate-sphere source is {0:e}, expected to vanish")]
    ObstructionNotCleared(f64),

    #[error("center update needs a nonzero mass estimate (got {0:e})")]
    ZeroMass(f64),

    #[error("iteration cap reached after {iterations} iterations (residual {residual:e})")]
    MaxIterations {
        iterations: usize,
        residual: f64,
        best: Box<LeafResult>,
    },

    #[error("Newton Jacobian is singular")]
    SingularJacobian,

    #[error("leaf centers differ by {distance}, more than half the radial spacing {spacing}")]
    CenterMismatchTooLarge { distance: f64, spacing: f64 },

    #[error("geometric center needs at least 3 leaves (got {0})")]
    InsufficientLeaves(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("schema error at `{path}`: {message}")]
    SchemaError { path: String, message: String },

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("malformed data file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::SchemaError {
            path: path.into(),
            message: message.into(),
        }
    }
}
