use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("bad permutation {0:?}")]
    BadPermutation(Vec<usize>),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("subsystem index {index} out of range for {count} subsystems")]
    SubsystemOutOfRange { index: usize, count: usize },

    #[error("empty subsystem selection")]
    EmptySelection,

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace {0} is not 1")]
    TraceNotOne(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("parameter {name} = {value} outside [{lo}, {hi}]")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("degenerate correlation matrix")]
    DegenerateCorrelation,

    #[error("non-Lorentzian spectrum (imaginary part {0:e})")]
    NonLorentzianSpectrum(f64),

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("filtered state has zero trace")]
    ZeroFilteredTrace,

    #[error("unknown family {0:?}")]
    UnknownFamily(String),

    #[error("unknown property {0:?}")]
    UnknownProperty(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("bracket does not straddle: indicator is {0} at both ends")]
    BracketDoesNotStraddle(bool),

    #[error("indicator not monotone in p: true at {p_true}, false at {p_false}")]
    NonMonotone { p_true: f64, p_false: f64 },

    #[error("evaluation failed at p = {p}: {reason}")]
    EvaluationFailed { p: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
