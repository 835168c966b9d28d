//! Configuration, run orchestration, and report persistence.

pub mod config;
pub mod report;
pub mod run;
pub mod schema;
