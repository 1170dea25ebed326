//! Library surface of the command-line tool: scenario configs, model
//! runners and the verification suites, shared with the test targets.

pub mod config;
pub mod runner;
pub mod suites;
