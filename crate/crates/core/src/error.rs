use std::path::PathBuf;

/// Errors reported by the simulation and analysis routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{}: bad snapshot magic {found:?}", .path.display())]
    BadMagic { path: PathBuf, found: [u8; 4] },
    #[error("{}: unsupported snapshot version {found} (expected {expected})", .path.display())]
    VersionMismatch { path: PathBuf, found: u32, expected: u32 },
    #[error("{}: truncated snapshot ({context})", .path.display())]
    Truncated { path: PathBuf, context: &'static str },
    #[error("{}: dimension mismatch ({detail})", .path.display())]
    DimensionMismatch { path: PathBuf, detail: String },
    #[error("io error on {}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("degenerate plaquette corner at grid index {index}: psi == 0 exactly")]
    DegenerateCorner { index: usize },
    #[error("cell {cell:?} has {incoming} incoming and {outgoing} outgoing pierced faces")]
    OddPiercedCount { cell: [usize; 3], incoming: usize, outgoing: usize },
    #[error("grad R and grad I are parallel at ({x}, {y}): tangent surfaces")]
    TangentSurfaces { x: f64, y: f64 },
    #[error("|grad psi|^2 = {value:e} below degeneracy floor")]
    DegenerateGradient { value: f64 },
    #[error("null tracking is ambiguous: {0}")]
    TrackingAmbiguity(String),
    #[error("zero separation between evaluation point and vortex {index}")]
    ZeroSeparation { index: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("non-positive value {value:e} at abscissa {at} in log-log fit range")]
    NonPositiveValue { at: f64, value: f64 },
    #[error("no screening signal: leading correlation bins are non-negative")]
    NoScreeningSignal,
    #[error("zero rotational energy in the requested range")]
    ZeroRotationalEnergy,
    #[error("c0 = {c0} admits no vortex pair (must lie in (0, {max}))")]
    NoVortexPair { c0: f64, max: f64 },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
