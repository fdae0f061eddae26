//! Library side of the `bfsk` command-line workbench: config parsing, filter
//! construction from descriptors, workload execution, report rendering, the
//! capability matrix, and the on-disk filter container. The binary in
//! `main.rs` is a thin argument-parsing shell over these modules.

pub mod config;
pub mod construct;
pub mod error;
pub mod matrix;
pub mod report;
pub mod run;
pub mod serialize;
