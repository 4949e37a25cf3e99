//! Command-line front end for the `dipolar` solvers: JSON configs, single
//! runs, K sweeps, root reports and cross-solver verification.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;
