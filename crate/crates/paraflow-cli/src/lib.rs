//! Scenario runner around `paraflow-core`: parse a key-value config,
//! dispatch to the catalog/Jacobi/flow/curve-shortening machinery, emit
//! CSV trajectories and verification summaries, and host the `--selftest`
//! suite.

pub mod config;
pub mod runner;
pub mod selftest;
