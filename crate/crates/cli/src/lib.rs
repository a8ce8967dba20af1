//! Command-line front end for the spin-system tomography simulator: JSON
//! scenario configs, deterministic seeded runs with manifested output
//! directories, and Cartesian parameter sweeps.

#![deny(missing_docs)]

pub mod config;
pub mod output;
pub mod scenarios;
pub mod sweep;

pub use config::{ConfigError, ScenarioConfig, ScenarioTag};
pub use output::{derive_seed, OutputDir, RunRecord};
pub use scenarios::{run_scenario, RunError, ScenarioMetrics};
pub use sweep::{run_sweep, SweepRecord};
