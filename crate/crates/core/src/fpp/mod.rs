//! Variants whose design goal is driving the false-positive rate down (or
//! trading it against other error kinds): veto lists, variable increments,
//! cell fingerprints, bit clearing, multi-level counters, reset hashes,
//! per-class hash sets, and paired complement filters.

pub mod acbf;
pub mod complement;
pub mod fp_cbf;
pub mod generalized;
pub mod multi_class;
pub mod retouched;
pub mod vi_cbf;
pub mod yes_no;

pub use acbf::AccurateCountingFilter;
pub use complement::ComplementFilter;
pub use fp_cbf::FingerprintCountingFilter;
pub use generalized::GeneralizedFilter;
pub use multi_class::MultiClassFilter;
pub use retouched::RetouchedFilter;
pub use vi_cbf::VariableIncrementFilter;
pub use yes_no::YesNoFilter;
