use thiserror::Error;

/// Every failure the toolkit reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate immersion at (u, v) = ({u}, {v}): det g = {det:e}")]
    DegenerateImmersion { u: f64, v: f64, det: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("non-manifold connectivity: {0}")]
    NonManifold(String),

    #[error("chart cutoff boundary enters the region of radius {radius} (cutoff {cutoff:?}); pass allow_truncation to accept")]
    TruncationUnsound { radius: f64, cutoff: Option<f64> },

    #[error("extrapolation did not converge: {0}")]
    NonConvergent(String),

    #[error("base point lies on the surface (|f - x0| = {distance:e}) and no puncture was declared")]
    BasePointOnSurface { distance: f64 },

    #[error("source surface is compact; its density at infinity vanishes and the identity does not apply")]
    CompactSource,

    #[error("point cloud is degenerate: eigenvalues {lambda1:e}, {lambda2:e}")]
    DegenerateCloud { lambda1: f64, lambda2: f64 },

    #[error("sample carries no tangent planes")]
    MissingTangents,

    #[error("sample spacing {spacing:e} exceeds 0.05 * scale {scale:e}")]
    SamplingTooCoarse { spacing: f64, scale: f64 },

    #[error("no sample points inside the ball of radius {radius} around the center")]
    EmptyBall { radius: f64 },

    #[error("end counts are not stable across the last radii: {counts:?}")]
    Unstable { counts: Vec<usize> },

    #[error("unknown surface '{0}'")]
    UnknownSurface(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line frontend.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergent(_) | Error::Unstable { .. } => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
