use thiserror::Error;

use crate::bergman::DemaillyStage;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero section has no sup-norm")]
    ZeroSupNorm,

    #[error("zero form rejected by {0}")]
    ZeroForm(&'static str),

    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("projective point (0, 0) is undefined")]
    ZeroPoint,

    #[error("invalid perturbation term: {0}")]
    InvalidPerturbation(String),

    #[error("curvature not positive: density {density:.3e} at grid point {index}")]
    NonPositiveCurvature { index: usize, density: f64 },

    #[error("invalid quadrature grid: {0}")]
    InvalidGrid(String),

    #[error("orthonormalization failed (residual {residual:.3e})")]
    OrthonormalizationFailed { residual: f64 },

    #[error("power sum overflow")]
    PowerSumOverflow,

    #[error("schedule caps exhausted: {reason}")]
    ScheduleExhausted {
        reason: String,
        best: Option<Box<DemaillyStage>>,
    },

    #[error("dimension too large for exhaustion (n = {0})")]
    DimensionTooLarge(usize),

    #[error("enumeration budget exceeded (box volume estimate {estimate:.3e})")]
    BudgetExceeded { estimate: f64 },

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("prime {0} exceeds the supported bound")]
    PrimeTooLarge(u64),

    #[error("zeta function has a pole at s = {0}")]
    ZetaPole(i64),

    #[error("factorization unverified (degree {degree})")]
    FactorizationUnverified { degree: usize },

    #[error("root certification failed (residual {residual:.3e})")]
    RootsUncertified { residual: f64 },

    #[error("vertical components present")]
    VerticalComponentsPresent,

    #[error("section has vertical components")]
    SectionHasVerticalComponents,

    #[error("degree {degree} is not a multiple of the bundle degree {bundle}")]
    NotAMultiple { degree: usize, bundle: u32 },

    #[error("divisor has no horizontal part")]
    EmptyDivisor,

    #[error("ball exhausted without a passing section: {0}")]
    NoGoodSection(crate::experiments::PassRates),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
