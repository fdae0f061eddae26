//! Bloom filter variants behind one capability-typed membership interface.
//!
//! Every structure here answers approximate set-membership questions, but they
//! differ in what else they can do: counting, deletion, whether false
//! negatives are possible, and what kind of result a query produces. The
//! [`api::MembershipFilter`] trait names those capabilities explicitly so
//! callers can pick a variant by contract instead of by folklore, and the
//! [`analysis`] module provides the matching closed-form false-positive
//! predictions plus measurement harnesses to check them.
//!
//! Concurrency model: filters are plain data. Queries take `&self`, mutations
//! take `&mut self`, so the borrow checker enforces single-writer /
//! multi-reader epochs; no interior locking is used anywhere.

pub mod analysis;
pub mod api;
pub mod bits;
pub mod classic;
pub mod compute;
pub mod dynamic;
pub mod fpp;
pub mod hash;
pub mod space;
pub mod special;
pub(crate) mod support;
