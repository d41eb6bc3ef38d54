//! Experiment harness for the switching subgradient solvers: TOML configs,
//! parallel grid runs, CSV metrics, SVG plots and self-checks.

pub mod config;
pub mod cputime;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod plot;
pub mod selftest;
pub mod setup;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, ExperimentOutcome};
pub use metrics::{MetricsRow, HEADER};
