use thiserror::Error;

/// Errors raised by the geometry, bundle, cylinder and family layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("set is empty: no occupied cell")]
    EmptySet,
    #[error("mode violation: {0}")]
    ModeViolation(String),
    #[error("margin too small: need {needed} cells, have {available}")]
    MarginTooSmall { needed: usize, available: usize },
    #[error("point lies on the set (distance zero)")]
    OnSet,
    #[error("point outside the valid domain")]
    OutOfDomain,
    #[error("no bundle sample accepted")]
    EmptyBundle,
    #[error("direction is not a normal: reach predicate fails at the first probe")]
    InvalidDirection,
    #[error("fiber sets live on different bundles (ids {0} and {1})")]
    BundleMismatch(usize, usize),
    #[error("subgraph condition (b) violated: max h_eps/eps = {observed} exceeds declared T = {declared}")]
    ConditionBViolated { observed: f64, declared: f64 },
    #[error("grid too coarse: {0}")]
    ResolutionTooCoarse(String),
    #[error("normal decomposition fails: collar sequence {0:?} does not vanish")]
    NormalDecompositionFails(Vec<f64>),
    #[error("polygon is not convex")]
    NonConvex,
    #[error("unsupported set for this check: {0}")]
    UnsupportedSet(String),
    #[error("density approximation condition fails: residuals {0:?}")]
    DensityConditionFails(Vec<f64>),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("bitmap format error: {0}")]
    Format(String),
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
