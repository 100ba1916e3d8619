//! Experiment registry, configuration, output and the brute-force oracle.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod oracle;
pub mod output;
pub mod svg;

pub use config::ExperimentConfig;
pub use experiments::{default_config, lookup, run_experiment, REGISTRY};
pub use manifest::RunManifest;
pub use oracle::{brute_force_statics, OracleStatics};
