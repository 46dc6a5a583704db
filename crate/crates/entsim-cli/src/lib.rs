//! Library side of the `entsim` binary: subcommand implementations, report
//! plumbing, and the on-disk JSON formats. Kept as a library so integration
//! tests can parse and validate the same schemas the binary emits.

pub mod commands;
pub mod report;
pub mod schema;
