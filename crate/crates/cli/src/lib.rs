//! Command-line driver: verification suites, configuration and file outputs.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod suites;
