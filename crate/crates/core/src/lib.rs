//! Simulation engine for runtime performance estimation in active learning.
//!
//! Tasks are synthetic with known ground truth, so every estimator can be
//! compared against oracle baselines. See the crate README for the CLI.

pub mod cli;
pub mod estimators;
pub mod harness;
pub mod io;
pub mod parzen;
pub mod quad;
pub mod stats;
pub mod synth;
