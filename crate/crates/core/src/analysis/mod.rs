//! Closed-form rate predictions and measurement harnesses.
//!
//! [`formula`] holds the analytic expressions, [`stream`] generates seeded
//! workloads, [`trial`] measures false-positive rates with exact binomial
//! confidence intervals, and [`compare`] sweeps variants across equal
//! bit-per-element budgets.

pub mod compare;
pub mod formula;
pub mod stream;
pub mod trial;

pub use compare::{compare_budget, BudgetCell, BudgetVariant};
pub use formula::{DeletableForm, Formula, StandardForm};
pub use stream::{generate_stream, StreamKind};
pub use trial::{clopper_pearson, empirical_fpp, predicted_fpp_for, run_trial, TrialReport};

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum AnalysisError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error(transparent)]
    Filter(#[from] crate::api::FilterError),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> AnalysisError {
    AnalysisError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
