//! Configuration, experiment orchestration and output for the `fastdiff`
//! command-line tool.

pub mod config;
pub mod experiment;
pub mod offline;
pub mod sweep;
