use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{PfaxError, Result};
use crate::preprocessing::{ExpansionSpec, SpheringPolicy};
use crate::sim::{
    Environment, PlaceCellSensor, Point, Rect, Sensor, WallSensor, DEFAULT_GOAL_TOL, DEFAULT_MAX_STEPS,
    DEFAULT_RAYS, DEFAULT_SPEED, PLACE_CELL_SIGMA_FRACTION,
};

/// One experiment, usually read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Seeds the random walk and, unless pinned, the place-cell layout.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub environment: EnvironmentConfig,
    pub sensor: SensorConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub training: TrainingConfig,
    #[serde(default)]
    pub navigation: NavigationConfig,
    #[serde(default)]
    pub map: MapConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub isolated: IsolatedConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub width: f64,
    pub height: f64,
    /// `[x0, y0, x1, y1]`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstacle: Option<[f64; 4]>,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        Self {
            width: 1.0,
            height: 1.0,
            obstacle: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SensorConfig {
    PlaceCells {
        count: usize,
        /// Defaults to a fixed fraction of the shorter table side.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
        /// Layout seed; the experiment seed is used when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Wall {
        #[serde(default = "default_rays")]
        rays: usize,
    },
}

fn default_rays() -> usize {
    DEFAULT_RAYS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub degree: u8,
    pub sphering: SpheringPolicy,
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub k: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            degree: 1,
            sphering: SpheringPolicy::Strict,
            p: 1,
            q: 1,
            r: 2,
            k: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub steps: usize,
    pub speed: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            steps: 10_000,
            speed: DEFAULT_SPEED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NavigationConfig {
    pub start: [f64; 2],
    pub goal: [f64; 2],
    pub speed: f64,
    pub max_steps: usize,
    /// Feature-space stopping tolerance.
    pub goal_tol: f64,
    pub collision: bool,
    /// World distance to the goal that counts as success in summaries.
    pub success_radius: f64,
}

impl Default for NavigationConfig {
    fn default() -> Self {
        Self {
            start: [0.2, 0.2],
            goal: [0.8, 0.8],
            speed: DEFAULT_SPEED,
            max_steps: DEFAULT_MAX_STEPS,
            goal_tol: DEFAULT_GOAL_TOL,
            collision: true,
            success_radius: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MapConfig {
    /// Cells along x and y.
    pub resolution: [usize; 2],
}

impl Default for MapConfig {
    fn default() -> Self {
        Self { resolution: [100, 100] }
    }
}

/// Axes left empty fall back to the template value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub r: Vec<usize>,
    pub k: Vec<usize>,
    pub steps: Vec<usize>,
    /// Empty means the experiment seed only.
    pub seeds: Vec<u64>,
    /// Draw start and goal per seed instead of using the navigation ones.
    pub random_endpoints: bool,
    pub min_separation: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            r: Vec::new(),
            k: Vec::new(),
            steps: Vec::new(),
            seeds: Vec::new(),
            random_endpoints: false,
            min_separation: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IsolatedConfig {
    pub count: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for IsolatedConfig {
    fn default() -> Self {
        Self {
            count: 2,
            max_iter: crate::isolated::DEFAULT_MAX_ITER,
            tol: crate::isolated::DEFAULT_TOL,
        }
    }
}

/// Scalar fields that can be set from the command line.
#[derive(Debug, Clone, Default, PartialEq, clap::Args)]
pub struct Overrides {
    /// Seed for sensor layout and random walk.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monomial expansion degree (1 to 3).
    #[arg(long)]
    pub degree: Option<u8>,
    /// History order of the perception features.
    #[arg(long)]
    pub p: Option<usize>,
    /// History order of the control signal.
    #[arg(long)]
    pub q: Option<usize>,
    /// Number of extracted features.
    #[arg(long)]
    pub r: Option<usize>,
    /// Iterated prediction depth for feature selection.
    #[arg(long)]
    pub k: Option<usize>,
    /// Training steps |T|.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Step length for training and navigation (world units).
    #[arg(long)]
    pub speed: Option<f64>,
    /// Navigation step limit.
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Feature-space distance that counts as arrival.
    #[arg(long)]
    pub goal_tol: Option<f64>,
    /// Block moves that touch the obstacle.
    #[arg(long)]
    pub collision: Option<bool>,
    /// Navigation start, x (world units).
    #[arg(long)]
    pub start_x: Option<f64>,
    /// Navigation start, y (world units).
    #[arg(long)]
    pub start_y: Option<f64>,
    /// Navigation goal, x (world units).
    #[arg(long)]
    pub goal_x: Option<f64>,
    /// Navigation goal, y (world units).
    #[arg(long)]
    pub goal_y: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| PfaxError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = super::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            PfaxError::Config(msg) => PfaxError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Applies command-line overrides and re-validates.
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        macro_rules! set {
            ($field:expr, $value:expr) => {
                if let Some(v) = $value {
                    $field = v;
                }
            };
        }
        set!(self.seed, o.seed);
        set!(self.model.degree, o.degree);
        set!(self.model.p, o.p);
        set!(self.model.q, o.q);
        set!(self.model.r, o.r);
        set!(self.model.k, o.k);
        set!(self.training.steps, o.steps);
        if let Some(s) = o.speed {
            self.training.speed = s;
            self.navigation.speed = s;
        }
        set!(self.navigation.max_steps, o.max_steps);
        set!(self.navigation.goal_tol, o.goal_tol);
        set!(self.navigation.collision, o.collision);
        set!(self.navigation.start[0], o.start_x);
        set!(self.navigation.start[1], o.start_y);
        set!(self.navigation.goal[0], o.goal_x);
        set!(self.navigation.goal[1], o.goal_y);
        self.validate()
    }

    pub fn environment(&self) -> Result<Environment> {
        let e = &self.environment;
        let obstacle = e.obstacle.map(|[x0, y0, x1, y1]| Rect::new(x0, y0, x1, y1)).transpose()?;
        Environment::new(e.width, e.height, obstacle)
    }

    /// Sensor for a run seeded with `seed`.
    pub fn sensor(&self, env: &Environment, seed: u64) -> Result<Sensor> {
        Ok(match self.sensor {
            SensorConfig::PlaceCells { count, sigma, seed: layout } => {
                let sigma = sigma.unwrap_or(PLACE_CELL_SIGMA_FRACTION * env.shorter_side());
                Sensor::PlaceCells(PlaceCellSensor::random(env, count, sigma, layout.unwrap_or(seed))?)
            }
            SensorConfig::Wall { rays } => Sensor::Wall(WallSensor::new(rays)?),
        })
    }

    pub fn expansion(&self) -> Result<ExpansionSpec> {
        ExpansionSpec::new(self.model.degree)
    }

    pub fn start(&self) -> Point {
        Point::from(self.navigation.start)
    }

    pub fn goal(&self) -> Point {
        Point::from(self.navigation.goal)
    }

    /// Checks every precondition that does not need training data.
    pub fn validate(&self) -> Result<()> {
        let env = self.environment()?;
        let sensor_dim = match self.sensor {
            SensorConfig::PlaceCells { count, sigma, .. } => {
                if count == 0 {
                    return Err(PfaxError::Config("sensor.count must be at least 1".into()));
                }
                if let Some(s) = sigma {
                    if !(s > 0.0 && s.is_finite()) {
                        return Err(PfaxError::Config(format!("sensor.sigma = {s} must be positive")));
                    }
                }
                count
            }
            SensorConfig::Wall { rays } => {
                WallSensor::new(rays)?;
                if self.model.degree > 1 && env.obstacle.is_none() {
                    log::info!("wall readouts sum to one; the expansion carries redundant monomials");
                }
                env.walls().len()
            }
        };
        let m = &self.model;
        let expanded = self.expansion()?.output_dim(sensor_dim);
        if m.p == 0 || m.q == 0 {
            return Err(PfaxError::Config(format!("model.p = {} and model.q = {} must be positive", m.p, m.q)));
        }
        if m.r == 0 || m.r > expanded {
            return Err(PfaxError::Config(format!(
                "model.r = {} must lie in 1..={expanded} (expanded input dimension)",
                m.r
            )));
        }
        let t = &self.training;
        let needed = m.p.max(m.q) + m.k + 2;
        if t.steps < needed {
            return Err(PfaxError::Config(format!(
                "training.steps = {} is too short for p, q and k (need at least {needed})",
                t.steps
            )));
        }
        for (name, v) in [("training.speed", t.speed), ("navigation.speed", self.navigation.speed)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PfaxError::Config(format!("{name} = {v} must be positive")));
            }
        }
        let n = &self.navigation;
        if !(n.goal_tol >= 0.0) || !(n.success_radius >= 0.0) {
            return Err(PfaxError::Config("navigation.goal_tol and success_radius must be non-negative".into()));
        }
        for (name, p) in [("start", self.start()), ("goal", self.goal())] {
            if !env.on_table(&p) {
                return Err(PfaxError::Config(format!(
                    "navigation.{name} ({}, {}) is off the table",
                    p.x, p.y
                )));
            }
        }
        if matches!(self.sensor, SensorConfig::Wall { .. }) && !env.is_free(&self.goal()) {
            return Err(PfaxError::Config("navigation.goal lies inside the obstacle".into()));
        }
        let [nx, ny] = self.map.resolution;
        if nx < 2 || ny < 2 {
            return Err(PfaxError::Config(format!("map.resolution {nx} x {ny} must be at least 2 x 2")));
        }
        let s = &self.sweep;
        if s.random_endpoints {
            let diag = env.width.hypot(env.height);
            if !(s.min_separation >= 0.0 && s.min_separation < 0.5 * diag) {
                return Err(PfaxError::Config(format!(
                    "sweep.min_separation = {} must lie in [0, {})",
                    s.min_separation,
                    0.5 * diag
                )));
            }
        }
        if s.r.iter().any(|&r| r == 0 || r > expanded) {
            return Err(PfaxError::Config(format!("sweep.r values must lie in 1..={expanded}")));
        }
        if s.steps.iter().any(|&st| st < m.p.max(m.q) + s.k.iter().copied().max().unwrap_or(m.k) + 2) {
            return Err(PfaxError::Config("sweep.steps values are too short for p, q and k".into()));
        }
        let iso = &self.isolated;
        if iso.count == 0 || iso.count > expanded || iso.max_iter == 0 || !(iso.tol > 0.0) {
            return Err(PfaxError::Config(format!(
                "isolated needs count in 1..={expanded}, max_iter >= 1 and tol > 0"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLACE: &str = r#"
seed = 3
[sensor]
kind = "place_cells"
count = 50
[model]
sphering = "reduce"
r = 2
"#;

    #[test]
    fn defaults_and_round_trip() {
        let cfg = ExperimentConfig::from_toml(PLACE).unwrap();
        assert_eq!(cfg.training.steps, 10_000);
        assert_eq!(cfg.model.sphering, SpheringPolicy::Reduce);
        let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn overrides_change_hash() {
        let mut cfg = ExperimentConfig::from_toml(PLACE).unwrap();
        let before = cfg.hash();
        cfg.apply(&Overrides {
            k: Some(5),
            speed: Some(0.03),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(cfg.model.k, 5);
        assert_eq!(cfg.navigation.speed, 0.03);
        assert_ne!(cfg.hash(), before);
    }

    #[test]
    fn rejects_bad_configs() {
        for bad in [
            "[sensor]\nkind = \"place_cells\"\ncount = 0",
            "[sensor]\nkind = \"wall\"\nrays = 10",
            "[sensor]\nkind = \"place_cells\"\ncount = 5\n[model]\nr = 6",
            "[sensor]\nkind = \"place_cells\"\ncount = 5\n[training]\nsteps = 2",
            "[sensor]\nkind = \"place_cells\"\ncount = 5\n[navigation]\ngoal = [2.0, 0.5]",
            "[sensor]\nkind = \"wall\"\n[environment]\nwidth = 1.0\nheight = 1.0\nobstacle = [0.4, 0.4, 0.6, 0.6]\n[navigation]\ngoal = [0.5, 0.5]",
            "[sensor]\nkind = \"place_cells\"\ncount = 5\ntypo = 1",
            "[sensor]\nkind = \"place_cells\"\ncount = 5\n[map]\nresolution = [1, 10]",
        ] {
            let err = ExperimentConfig::from_toml(bad).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad}: {err}");
        }
    }

    #[test]
    fn sensor_layout_follows_seed() {
        let cfg = ExperimentConfig::from_toml(PLACE).unwrap();
        let env = cfg.environment().unwrap();
        let a = cfg.sensor(&env, 1).unwrap();
        let b = cfg.sensor(&env, 2).unwrap();
        assert_ne!(a, b);
        match a {
            Sensor::PlaceCells(s) => assert_eq!(s.sigma, 0.2),
            _ => unreachable!(),
        }
    }
}
