//! Command-line front end for the `cldg-core` solver: configuration files,
//! CSV output, experiment drivers and the invariant checks shared by
//! `cldg selftest` and the acceptance suite.

pub mod checks;
pub mod config;
pub mod output;
pub mod run;
