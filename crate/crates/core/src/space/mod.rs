//! Space-reorganizing designs: hash-table-shaped counting storage, payload
//! slots addressed through the filter's own probe positions, per-document
//! row matrices compared bitwise, and a lossy block re-encoding that shrinks
//! an existing bit array.

mod bfah;
mod compacted;
mod dl_cbf;
mod matrix;

pub use bfah::AttachedValueFilter;
pub use compacted::CompactedBitArray;
pub use dl_cbf::DLeftCountingFilter;
pub use matrix::{chunks_of, MatrixFilter};
