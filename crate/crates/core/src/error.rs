use thiserror::Error;

/// Errors raised while building or evaluating a scenario.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse scenario document: {0}")]
    Parse(String),

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("`{key}` must be strictly positive (got {value})")]
    NonPositive { key: String, value: f64 },

    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },

    #[error("training length must be < coherence block (tau = {tau}, tau_c = {tau_c})")]
    TrainingTooLong { tau: usize, tau_c: usize },

    #[error("training length {tau} cannot carry {users} orthogonal pilots")]
    TooFewPilots { tau: usize, users: usize },

    #[error("region list has {found} entries but `users` is {expected}")]
    RegionCount { found: usize, expected: usize },

    #[error("surface grid {horizontal}x{vertical} does not match {elements} elements")]
    GridMismatch {
        horizontal: usize,
        vertical: usize,
        elements: usize,
    },

    #[error("nodes `{a}` and `{b}` coincide; path loss is undefined at zero distance")]
    ZeroDistance { a: String, b: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (relative asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("unknown model selector `{0}`")]
    UnknownModel(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("need at least {required} Monte-Carlo samples, got {got}")]
    TooFewSamples { required: usize, got: usize },

    #[error("workspace was built for a different surface configuration")]
    StaleWorkspace,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
