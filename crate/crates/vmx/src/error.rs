use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum VmxError {
    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("field sampling failed at t={t}, x=({x}, {y}, {z}): {reason}")]
    FieldSample { t: f64, x: f64, y: f64, z: f64, reason: String },

    #[error("particle at ({x}, {y}, {z}) outside grid extents")]
    ParticleOutsideGrid { x: f64, y: f64, z: f64 },

    #[error("time step {dt} violates stability bound dt <= {max_dt} (= h/sqrt(3))")]
    StabilityViolation { dt: f64, max_dt: f64 },

    #[error("history horizon exceeded: need look-back {needed}, have {available}")]
    HorizonExceeded { needed: f64, available: f64 },

    #[error("history has no field snapshot covering t={0}")]
    MissingSnapshot(f64),

    #[error("config error at {path}:{line}: {message}")]
    Config { path: String, line: usize, message: String },

    #[error("config invariant violated for `{field}`: {message}")]
    ConfigInvariant { field: String, message: String },

    #[error("run halted at t={t}: {reason}")]
    RunHalted { t: f64, reason: String },

    #[error("snapshot format error: {0}")]
    SnapshotFormat(String),

    #[error("sweep spec violates lemma hypothesis: {0}")]
    HypothesisViolation(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl VmxError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        VmxError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, VmxError>;
