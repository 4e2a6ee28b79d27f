//! Run orchestration: a TOML config in, CSV files and a manifest out.
//!
//! This is the layer the command-line binary is a thin shell around. It
//! owns the config schema ([`ScenarioConfig`] and the per-kind blocks),
//! parameter defaulting and validation, and the mapping from sweep results
//! to the documented CSV schemas.

mod config;
mod runner;

pub use config::{
    parse_config, ComplexParam, EventConfig, FaultConfig, FaultTypeParam, GpsConfig, ModelParam,
    PolarParam, ScenarioConfig, ScenarioKind, VoltageConfig,
};
pub use runner::{run_scenario, run_to_dir, RunReport};
