//! Experiment plumbing: TOML configs, the versioned model file, CSV and
//! pixmap artifacts, and the commands behind the `pfax` binary.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod model_file;

pub use commands::{
    cmd_isolated, cmd_map, cmd_navigate, cmd_sweep, cmd_train, isolated, random_endpoints, run_navigation, sweep,
    train, NavSummary, SweepRow,
};
pub use config::{ExperimentConfig, Overrides, SensorConfig};
pub use model_file::{ModelFile, TrainingMeta, MODEL_FORMAT, MODEL_VERSION};

fn read_to_string(path: &std::path::Path) -> crate::Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}
