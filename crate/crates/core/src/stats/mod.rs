//! The validation battery: correlation inference, permutation tests, DCCA,
//! lagged regression with Newey–West errors, KPSS, two-proportion χ² and
//! ROC/AUC.

use thiserror::Error;

pub mod auc;
pub mod correlation;
pub mod dcca;
pub mod dist;
pub mod kpss;
pub mod permutation;
pub mod proportions;
pub mod regression;

pub use auc::{roc_auc, roc_curve, RocPoint};
pub use correlation::{
    correlate, correlation_p, fisher_ci, pearson, significance_marker, CorrelationResult,
};
pub use dcca::{dcca, DccaResult};
pub use kpss::{kpss, kpss_with_lag, KpssBand, KpssResult};
pub use permutation::{permutation_test, PermutationConfig, PermutationResult, Shuffle};
pub use proportions::{chi2_two_proportions, percent_difference};
pub use regression::{lagged_regression_hac, HacOptions, RegressionFit};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {need} observations, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("constant series")]
    Constant,
    #[error("|r| = 1: interval undefined")]
    PerfectCorrelation,
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("singular design matrix")]
    Singular,
    #[error("zero variance")]
    ZeroVariance,
    #[error("single-class labels")]
    SingleClass,
}

pub type Result<T> = std::result::Result<T, StatsError>;

pub(crate) fn check_pair(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < min {
        return Err(StatsError::TooShort {
            need: min,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::Invalid("non-finite value".into()));
    }
    Ok(())
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub(crate) fn is_constant(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[0] == w[1])
}
