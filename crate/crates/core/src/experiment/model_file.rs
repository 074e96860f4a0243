use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SensorConfig};
use crate::error::{PfaxError, Result};
use crate::pfax::PfaxModel;
use crate::sim::{Environment, Sensor, PLACE_CELL_SIGMA_FRACTION};

pub const MODEL_FORMAT: &str = "pfax-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub steps: usize,
    pub speed: f64,
    /// Walk steps on which the agent could not move.
    pub stalls: usize,
}

/// A trained model together with the world it was trained in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub environment: Environment,
    pub sensor: Sensor,
    pub training: TrainingMeta,
    pub model: PfaxModel,
}

impl ModelFile {
    pub fn new(config_hash: String, environment: Environment, sensor: Sensor, training: TrainingMeta, model: PfaxModel) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            config_hash,
            environment,
            sensor,
            training,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            format: String,
            version: u32,
        }
        let header: Header = serde_json::from_str(text).map_err(|e| PfaxError::ModelFormat(e.to_string()))?;
        if header.format != MODEL_FORMAT {
            return Err(PfaxError::ModelFormat(format!("unknown format {:?}", header.format)));
        }
        if header.version != MODEL_VERSION {
            return Err(PfaxError::ModelFormat(format!(
                "version {} is not supported (expected {MODEL_VERSION})",
                header.version
            )));
        }
        serde_json::from_str(text).map_err(|e| PfaxError::ModelFormat(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&super::read_to_string(path)?)
    }

    /// Whether `cfg` describes the world and preprocessing this model was
    /// trained on.
    pub fn check_compatible(&self, cfg: &ExperimentConfig) -> Result<()> {
        let env = cfg.environment()?;
        if env != self.environment {
            return Err(PfaxError::Incompatible(format!(
                "model was trained in {:?}, config describes {:?}",
                self.environment, env
            )));
        }
        let sensor_ok = match (&cfg.sensor, &self.sensor) {
            (SensorConfig::PlaceCells { count, sigma, .. }, Sensor::PlaceCells(s)) => {
                let sigma = sigma.unwrap_or(PLACE_CELL_SIGMA_FRACTION * env.shorter_side());
                *count == s.centers.len() && sigma == s.sigma
            }
            (SensorConfig::Wall { rays }, Sensor::Wall(s)) => *rays == s.rays,
            _ => false,
        };
        if !sensor_ok {
            return Err(PfaxError::Incompatible(format!(
                "model sensor {} does not match the configured sensor",
                describe(&self.sensor)
            )));
        }
        if cfg.model.degree != self.model.expansion.degree() {
            return Err(PfaxError::Incompatible(format!(
                "model uses expansion degree {}, config asks for {}",
                self.model.expansion.degree(),
                cfg.model.degree
            )));
        }
        Ok(())
    }
}

fn describe(sensor: &Sensor) -> String {
    match sensor {
        Sensor::PlaceCells(s) => format!("place cells (count {}, sigma {})", s.centers.len(), s.sigma),
        Sensor::Wall(s) => format!("wall sensor ({} rays)", s.rays),
    }
}
