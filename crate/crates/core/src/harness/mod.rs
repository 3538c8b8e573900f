//! Planted-instance generation, batch experiments, and JSON file formats.

mod experiment;
mod instance;
pub mod io;

pub use experiment::{run_experiment, ExperimentConfig, ExperimentSummary, SpecSummary};
pub use instance::{derive_seed, gen_instance, gen_instance_prepared, BddInstance, Planted, RadiusPolicy};
