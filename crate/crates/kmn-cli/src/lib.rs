//! Config-driven front end for the K(m, n) laboratory.
//!
//! A scenario file names one workflow and its parameters; [`config`] parses
//! and validates it, [`run`] executes the workflow and writes deterministic
//! CSV output. The `kmn-lab` binary is a thin wrapper over these two
//! modules.

pub mod config;
pub mod run;
