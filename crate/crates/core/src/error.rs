use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("unsupported signature ({p},{q}) for {what}")]
    UnsupportedSignature { p: usize, q: usize, what: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("zero spinor")]
    ZeroSpinor,
    #[error("invalid spin factor: {0}")]
    InvalidFactor(String),
    #[error("no phase in {{1, i, -1, -i}} makes {0}")]
    NoPhase(String),
    #[error("inconsistent sigma jet: {0}")]
    InconsistentJet(String),
    #[error("gauge mismatch")]
    GaugeMismatch,
    #[error("intertwiner construction failed: {0}")]
    Intertwiner(String),
    #[error("form is not simple: {0}")]
    NotSimple(String),
    #[error("form is not decomposable")]
    NotDecomposable,
    #[error("unclassified: {0}")]
    Unclassified(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("degenerate metric at point")]
    DegenerateMetric,
    #[error("chart singularity")]
    ChartSingularity,
    #[error("point is not a zero of the spinor (|phi| = {0:e})")]
    NotAZero(f64),
    #[error("vector is not tangent")]
    NotTangent,
    #[error("constraint violation: {0}")]
    Constraint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
