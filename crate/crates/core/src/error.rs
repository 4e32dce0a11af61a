use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("kron product dimension {0} exceeds configured maximum {1}")]
    DimensionOverflow(usize, usize),

    #[error("generator is not anti-Hermitian: max |G + G^H| = {0:.3e}")]
    NotAntiHermitian(f64),

    #[error("density matrix is not Hermitian: max asymmetry = {0:.3e}")]
    NotHermitian(f64),

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("the non-Gaussian preset requires cutoff 10, got {0}")]
    PresetCutoff(usize),

    #[error("fidelity {0} outside [0, 1]")]
    FidelityRange(f64),

    #[error("displacement |alpha| = {0} out of range")]
    DisplacementRange(f64),

    #[error("sampled evaluation requires an rng stream")]
    MissingRng,

    #[error("swap-test circuit oracle limited to cutoff <= {max}, got {got}")]
    OracleCutoff { max: usize, got: usize },

    #[error("objective returned a non-finite value {value} at evaluation {index}")]
    NonFiniteObjective { value: f64, index: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {context}: {message}")]
    Parse { context: String, message: String },
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
