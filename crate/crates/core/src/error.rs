use serde::Serialize;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probabilities must be strictly positive and sum to 1 (sum = {sum})")]
    InvalidProbabilities { sum: f64 },

    #[error("payoff has no states")]
    EmptyPayoff,

    #[error("payoff is identically zero; the Hansen ratio is undefined")]
    ZeroPayoff,

    #[error("value {value} is outside the admissible range {range}")]
    OutOfRange { value: f64, range: &'static str },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("payoffs are not defined on a common state space")]
    StateSpaceMismatch,

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row}, tolerance {tolerance:e})")]
    NotPositiveDefinite { row: usize, pivot: f64, tolerance: f64 },

    #[error("price vector is zero: no fully invested portfolio exists")]
    DegeneratePrices,

    #[error("zero-cost portfolio attains squared Hansen ratio {hr_sq_x}: risk-free profit at zero cost")]
    ArbitrageDetected { hr_sq_x: f64 },

    #[error("squared Hansen ratios of X and Y sum to {sum} > 1: mean functional inconsistent with the Gram matrix")]
    HansenBoundViolated { sum: f64 },

    #[error("discount factor beta = {beta} must lie in (0, 1)")]
    InvalidBeta { beta: f64 },

    #[error("horizon must be at least 1 (got {0})")]
    InvalidHorizon(usize),

    #[error("squared Hansen ratio of X is zero: the frontier degenerates to the single point Y")]
    ZeroX,

    #[error("operation needs a scenario-backed market")]
    NotScenarioBacked,

    #[error("payoff misprices basis asset {asset}: E[m B] = {implied}, price {price}")]
    NotAKernel { asset: usize, implied: f64, price: f64 },

    #[error("kernel takes negative value {value} in state {state}")]
    NegativeKernel { state: usize, value: f64 },

    #[error("payoff mean {mean} is not positive")]
    NonPositiveMean { mean: f64 },

    #[error("payoff has no downside (W >= 0 almost surely)")]
    NoDownside,

    #[error("scenario tree would have {leaves} leaves (limit {limit})")]
    TreeTooLarge { leaves: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidProbabilities { .. } => "invalid_probabilities",
            Error::EmptyPayoff => "empty_payoff",
            Error::ZeroPayoff => "zero_payoff",
            Error::OutOfRange { .. } => "out_of_range",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::StateSpaceMismatch => "state_space_mismatch",
            Error::NotSymmetric { .. } => "not_symmetric",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::DegeneratePrices => "degenerate_prices",
            Error::ArbitrageDetected { .. } => "arbitrage_detected",
            Error::HansenBoundViolated { .. } => "hansen_bound_violated",
            Error::InvalidBeta { .. } => "invalid_beta",
            Error::InvalidHorizon(_) => "invalid_horizon",
            Error::ZeroX => "zero_x",
            Error::NotScenarioBacked => "not_scenario_backed",
            Error::NotAKernel { .. } => "not_a_kernel",
            Error::NegativeKernel { .. } => "negative_kernel",
            Error::NonPositiveMean { .. } => "non_positive_mean",
            Error::NoDownside => "no_downside",
            Error::TreeTooLarge { .. } => "tree_too_large",
            Error::Parse(_) => "parse",
            Error::Invariant(_) => "invariant_violation",
        }
    }

    /// True for failures of internal consistency rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }

    pub fn to_report(&self, context: impl Into<String>) -> ErrorReport {
        ErrorReport { code: self.code(), message: self.to_string(), context: context.into() }
    }
}

/// Structured error emitted by the command-line front end.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub code: &'static str,
    pub message: String,
    pub context: String,
}
