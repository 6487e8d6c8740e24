//! Support library for the `spiralsheet` binary: run configuration,
//! the solution archive format, and the runtime invariant suites.
//!
//! Kept as a library so integration tests can build configs and inspect
//! archives with the same code the binary uses.

pub mod archive;
pub mod check;
pub mod config;
