//! Support code for the `multigap` binary: the matrix cache and the audit.

pub mod audit;
pub mod cache;
