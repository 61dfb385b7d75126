use thiserror::Error;

/// Errors raised by the measurement toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("operator is not hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("operator is not positive (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("eigenvalue {0} lies outside every outcome bin")]
    StrayEigenvalue(f64),

    #[error("interval [{lo}, {hi}) contains no grid point")]
    EmptyInterval { lo: f64, hi: f64 },

    #[error("outcome lattices are incommensurate: {0}")]
    Incommensurate(String),

    #[error("smearing mass {0:.3e} falls outside the representable outcome range")]
    OutcomeRangeExceeded(f64),

    #[error("postselection mass below threshold ({mass:.3e})")]
    PostselectionImpossible { mass: f64 },

    #[error("probe grid too small: translations need half-extent {required:.4}, grid has {available:.4}")]
    ProbeTooSmall { required: f64, available: f64 },

    #[error("pointer grid under-resolves the probe (Kraus closure deviation {0:.3e}); use finer pointer bins")]
    PointerUnderresolved(f64),

    #[error("probe condition violated: {0}")]
    ProbeCondition(String),

    #[error("extrapolation needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("coupling strengths must be strictly decreasing and positive")]
    NotStrictlyDecreasing,

    #[error("resampling aliases {0:.3e} of the mass")]
    Aliasing(f64),

    #[error("phase-space normalization deficit {0:.3e}; enlarge the box")]
    NormalizationDeficit(f64),

    #[error("kernel is not informationally complete on the working box (zero fraction {0:.3e})")]
    CompletenessViolation(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
