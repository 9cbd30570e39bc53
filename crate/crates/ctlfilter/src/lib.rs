//! File formats, workflows and the command line for `ctlfilter`.
//!
//! The algorithms live in `ctlfilter-core`; this crate reads and writes
//! corpora, models, verdicts and reports, and wires them into the
//! `filter`, `build-control`, `supervise`, `evaluate` and `simulate`
//! subcommands.

pub mod cli;
pub mod config;
pub mod corpus_io;
pub mod model_file;
pub mod pipeline;
pub mod records;
pub mod report;

pub use cli::{run, CliError};
pub use ctlfilter_core as core;
