//! Library surface of the verification runner, so integration tests can
//! parse and validate the emitted tables.

pub mod config;
pub mod runner;
