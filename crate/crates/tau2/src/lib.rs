//! Configuration files, verification suites, reports and tables for the
//! `tau2` tool. The numerics live in `tau2-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod oracles;
pub mod report;
pub mod suites;
pub mod tables;
