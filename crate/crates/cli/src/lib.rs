//! Scenario files, runners and report output for the `l2hodge` binary.

pub mod config;
pub mod report;
pub mod scenarios;
