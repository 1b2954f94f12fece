use std::path::PathBuf;

/// Errors produced by the solvers and their input validation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("domain has no inside cells at resolution {resolution}")]
    EmptyMask { resolution: usize },

    #[error("resolution {0} is below the minimum of 8")]
    ResolutionTooSmall(usize),

    #[error("non-positive film thickness {value} at cell ({i}, {j})")]
    NonPositiveThickness { i: usize, j: usize, value: f64 },

    #[error("field sampled on a {got_nx}x{got_ny} grid, expected {nx}x{ny}")]
    GridMismatch {
        nx: usize,
        ny: usize,
        got_nx: usize,
        got_ny: usize,
    },

    #[error("obstacles not ordered at cell ({i}, {j}): lower {lower} >= upper {upper}")]
    ObstacleOrder { i: usize, j: usize, lower: f64, upper: f64 },

    #[error("solver did not converge in {iterations} iterations (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("invalid solver parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid bracket [{lo}, {hi}]: {reason}")]
    InvalidBracket { lo: f64, hi: f64, reason: String },

    #[error("measure has zero total variation")]
    ZeroMeasure,

    #[error("could not enforce vortex separation {min_sep:e} after {attempts} redraws")]
    SeparationFailed { min_sep: f64, attempts: usize },

    #[error("vortex core at ({x}, {y}) with radius {radius:e} reaches the domain boundary")]
    CoreOnBoundary { x: f64, y: f64, radius: f64 },

    #[error("log(kappa) = {log_kappa} is too small to place any vortex")]
    KappaTooSmall { log_kappa: f64 },

    #[error("root finder failed to bracket: {0}")]
    NoBracket(String),

    #[error("mask file {path}: {reason}")]
    MaskFile { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
