//! Filters for less conventional workloads: counter-free deletion,
//! near-neighbour membership, fingerprint tables with relocation,
//! time-segmented history, and real-valued vector elements.

mod cuckoo;
mod deletable;
mod distance_sensitive;
mod hdbf;
mod persistent;

pub use cuckoo::CuckooFilter;
pub use deletable::DeletableFilter;
pub use distance_sensitive::DistanceSensitiveFilter;
pub use hdbf::HighDimensionalFilter;
pub use persistent::PersistentFilter;
