//! Batch front end for `meancount-core`: series files, run configuration,
//! command dispatch and CSV/JSON output.
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod output;
