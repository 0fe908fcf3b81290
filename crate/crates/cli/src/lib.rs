//! Command-line pipeline around `imgmine-core`.
//!
//! Exit codes: 0 success, 1 some items failed, 2 I/O, 3 invalid input or
//! configuration, 4 incompatible model.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod synth;
