//! Seeded Monte Carlo experiments: user drops, the antenna and power sweeps,
//! the beam-pattern table, and their config and CSV formats.

pub mod config;
pub mod csv;
pub mod montecarlo;
mod sweeps;

pub use config::{ExperimentConfig, SweepKind, SweepSpec};
pub use montecarlo::{monte_carlo, Summary};
pub use sweeps::*;
