//! Filters whose footprint or layout follows the workload: a growing chain
//! of fixed-capacity counting filters, per-item probe budgets allocated by
//! query weight, an invertible table that can list its contents back out,
//! and an offset-coded array answering two questions with one lookup.

mod dynamic_bf;
mod iblt;
mod shifting;
mod weighted;

pub use dynamic_bf::DynamicFilter;
pub use iblt::InvertibleFilter;
pub use shifting::ShiftingFilter;
pub use weighted::WeightedFilter;
