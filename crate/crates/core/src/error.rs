use std::path::PathBuf;

/// Everything that can go wrong inside the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("spatial dimension {0} is not supported (expected 1 or 2)")]
    InvalidDimension(usize),
    #[error("grid spacing must be positive, got {0}")]
    NonPositiveSpacing(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("separation d = {d} does not exceed twice the support radius a = {a}")]
    SeparationTooSmall { d: f64, a: f64 },
    #[error("potential support comes within one grid spacing of the box boundary")]
    BoxTooSmall,
    #[error("grid functions or operators live on different grids")]
    GridMismatch,
    #[error("plane x1 = {0} is not aligned to the half-lattice of the grid")]
    MisalignedPlane(f64),
    #[error("translation by {0} is not an integer number of grid steps")]
    MisalignedTranslation(f64),
    #[error("plane x1 = {c} lies inside a well support (a = {a}, d = {d})")]
    PlaneInsideSupport { c: f64, a: f64, d: f64 },
    #[error("eigenfunction has no definite parity")]
    NoDefiniteParity,
    #[error("tail fit window [{lo}, {hi}] does not fit inside the box")]
    TailTooShort { lo: f64, hi: f64 },
    #[error("eigenfunction changes sign inside the tail fit window")]
    SignChangeInWindow,
    #[error("eigensolver did not converge after {0} restarts")]
    NoConvergence(usize),
    #[error("basis is numerically degenerate (Gram condition number {0:.3e})")]
    DegenerateBasis(f64),
    #[error("expected a cluster of 2 double-well levels, found {0}")]
    WrongClusterSize(usize),
    #[error("overlap |s| = {0} is too large for the two-level model")]
    OverlapTooLarge(f64),
    #[error("samples change sign")]
    SignChange,
    #[error("need at least 4 samples, got {0}")]
    TooFewSamples(usize),
    #[error("{path}:{line}:{column}: {message}")]
    Config {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed data in {path}: {message}")]
    Format { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
