use thiserror::Error;

/// Errors raised by the library. Every variant names the violated invariant so
/// callers (the CLI in particular) can surface it verbatim.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} out of range: must satisfy 2 <= d <= {max}", max = crate::qcore::MAX_DIMENSION)]
    InvalidDimension(usize),

    #[error("index {index} out of range for dimension {dimension}")]
    IndexOutOfRange { index: usize, dimension: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("basis mismatch: expected {expected} amplitudes, found {found}")]
    BasisMismatch {
        expected: crate::qcore::Basis,
        found: crate::qcore::Basis,
    },

    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),

    #[error("invalid likelihood for outcome '{label}': {reason}")]
    InvalidLikelihood { label: String, reason: String },

    #[error("outcome '{0}' never occurs")]
    OutcomeNeverOccurs(String),

    #[error("outcome impossible for this input (probability {0:e})")]
    OutcomeImpossible(f64),

    #[error("measurement model is incomplete: sum over outcomes of p(m|a={a}) is {sum}, expected 1")]
    IncompleteModel { a: usize, sum: f64 },

    #[error("measurement model has no outcomes")]
    EmptyModel,

    #[error("spectrum does not describe a minimally disturbing outcome: {0}")]
    NotMinimallyDisturbing(String),

    #[error("invalid disturbance distribution: {0}")]
    InvalidDistribution(String),

    #[error("bound violated: max posterior {max_posterior} exceeds bound {bound}")]
    BoundViolated { bound: f64, max_posterior: f64 },

    #[error("dense path limited to d <= {max}, got {0}", max = crate::dense::MAX_DENSE_DIMENSION)]
    DenseTooLarge(usize),

    #[error("outcome '{0}' has no observations")]
    NoObservations(String),

    #[error("negative count {count} at shift {k} for outcome '{label}'")]
    NegativeCount { label: String, k: usize, count: i64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed document: {0}")]
    Malformed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
