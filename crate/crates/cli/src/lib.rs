//! Scenario runner and acceptance suite for the `spacelike` crate.

pub mod config;
pub mod runner;
pub mod status;
pub mod suite;
pub mod tasks;
