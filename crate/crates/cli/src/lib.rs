//! Scenario files, batch runs and reproduction commands for the
//! `angleform-core` formation controller.
//!
//! The binary is a thin wrapper over [`commands`]; the modules are public so
//! tests and other tools can drive the same code paths.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod plot;
pub mod report;
pub mod scenario_file;

pub use error::CliError;
