//! Scenario-driven front end for the symlab verification harness.

pub mod demos;
pub mod runner;
pub mod scenario;

pub use runner::{execute, run_scenario, Outcome, RunError, RunOptions};
pub use scenario::{Scenario, ScenarioError};
