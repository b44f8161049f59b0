//! Experiment harness for the `subgrad` solvers: instance files, traces,
//! paired speedup timings and multi-seed comparisons.

pub mod cli;
pub mod commands;
pub mod spec;

pub use cli::{execute, Cli};
pub use commands::BenchError;
