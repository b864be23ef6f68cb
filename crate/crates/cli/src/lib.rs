pub mod config;
pub mod runs;

pub use config::{ExperimentConfig, ShiftPolicy};
pub use runs::Outcome;
