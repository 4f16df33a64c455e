use std::path::PathBuf;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("array shape {got:?} does not match grid shape {expected:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("derivative order {order} exceeds the resolution-safety cap {cap}")]
    OrderCap { order: usize, cap: usize },

    #[error("Sobolev index {0} exceeds the cap of 8")]
    SobolevCap(u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("CFL violation: dt = {dt:e} exceeds the stable bound {bound:e}")]
    Cfl { dt: f64, bound: f64 },

    #[error("solution reached the box boundary at t = {t}: boundary sup {value:e}")]
    BoundaryLeak { t: f64, value: f64 },

    #[error("step size floor reached at t = {t} (dt = {dt:e}): {reason}")]
    BlowUp { t: f64, dt: f64, reason: String },

    #[error("Picard iteration stopped contracting at iteration {iteration} (ratio {ratio})")]
    NonContraction { iteration: usize, ratio: f64 },

    #[error("configuration invalid:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("checkpoint format: {0}")]
    Checkpoint(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
