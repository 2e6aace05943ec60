//! Configuration, execution and CSV output behind the `cvqkd-sat` binary.

pub mod config;
pub mod output;
pub mod run;
