use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::artifacts;
use super::config::ExperimentConfig;
use super::model_file::{ModelFile, TrainingMeta};
use crate::error::Result;
use crate::isolated::{extract_isolated, IsolatedComponent};
use crate::pfax::{fit_pfax, PfaxParams};
use crate::preprocessing::{apply_sphering, expand, fit_sphering_with};
use crate::sim::{
    feature_distance_map, navigate, random_walk, DistanceMap, Environment, EventKind, NavigationParams, Point,
    Trajectory, Walk,
};

pub const MODEL_FILE: &str = "model.json";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const GRID_FILE: &str = "map.csv";
pub const IMAGE_FILE: &str = "map.ppm";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const ISOLATED_FILE: &str = "isolated.csv";
pub const ISOLATED_VECTORS_FILE: &str = "isolated_vectors.csv";

fn fit_on_walk(cfg: &ExperimentConfig, walk: &Walk, r: usize, k: usize) -> Result<crate::pfax::PfaxModel> {
    let params = PfaxParams {
        expansion: cfg.expansion()?,
        sphering: cfg.model.sphering,
        p: cfg.model.p,
        q: cfg.model.q,
        r,
        k,
    };
    fit_pfax(&walk.perceptions, &walk.deltas, &params)
}

fn walk_for(cfg: &ExperimentConfig, env: &Environment, seed: u64, steps: usize) -> Result<(crate::sim::Sensor, Walk)> {
    let sensor = cfg.sensor(env, seed)?;
    let walk = random_walk(env, &sensor, steps, cfg.training.speed, seed)?;
    Ok((sensor, walk))
}

/// Random walk followed by a PFAx fit, as configured.
pub fn train(cfg: &ExperimentConfig) -> Result<ModelFile> {
    let env = cfg.environment()?;
    let (sensor, walk) = walk_for(cfg, &env, cfg.seed, cfg.training.steps)?;
    let model = fit_on_walk(cfg, &walk, cfg.model.r, cfg.model.k)?;
    log::info!(
        "trained r = {} of n = {} sphered components on {} steps ({} stalls)",
        model.r(),
        model.n(),
        cfg.training.steps,
        walk.stalls.len()
    );
    let meta = TrainingMeta {
        seed: cfg.seed,
        steps: cfg.training.steps,
        speed: cfg.training.speed,
        stalls: walk.stalls.len(),
    };
    Ok(ModelFile::new(cfg.hash(), env, sensor, meta, model))
}

/// Outcome of one navigation run in world terms.
#[derive(Debug, Clone, PartialEq)]
pub struct NavSummary {
    /// The feature-space stopping rule fired.
    pub reached: bool,
    /// The run ended within the configured world radius of the goal.
    pub success: bool,
    pub final_distance: f64,
    pub path_length: f64,
    pub path_ratio: Option<f64>,
    pub steps: usize,
    /// Some move crossed the obstacle or tried to enter it.
    pub touched_obstacle: bool,
}

impl NavSummary {
    pub fn new(env: &Environment, traj: &Trajectory, start: &Point, goal: &Point, success_radius: f64) -> Self {
        let final_distance = (traj.final_position() - goal).norm();
        let crossed = traj.positions.windows(2).any(|w| env.move_hits_obstacle(&w[0], &w[1]));
        let entered = traj.events.iter().any(|e| e.kind == EventKind::EnteredObstacle);
        Self {
            reached: traj.reached,
            success: final_distance <= success_radius,
            final_distance,
            path_length: traj.path_length(),
            path_ratio: traj.path_ratio(start, goal),
            steps: traj.controls.len(),
            touched_obstacle: crossed || entered,
        }
    }
}

impl fmt::Display for NavSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} final_distance_world={} path_length_world={} steps={} success={} touched_obstacle={}",
            if self.reached { "reached" } else { "not-reached" },
            self.final_distance,
            self.path_length,
            self.steps,
            self.success,
            self.touched_obstacle
        )
    }
}

/// Navigates with a trained model from `start` to `goal` using the
/// configured speed, limits and collision mode.
pub fn run_navigation(file: &ModelFile, cfg: &ExperimentConfig, start: Point, goal: Point) -> Result<(Trajectory, NavSummary)> {
    let nav = &cfg.navigation;
    let params = NavigationParams {
        start,
        goal,
        speed: nav.speed,
        max_steps: nav.max_steps,
        goal_tol: nav.goal_tol,
        collision: nav.collision,
    };
    let traj = navigate(&file.model, &file.environment, &file.sensor, &params)?;
    let summary = NavSummary::new(&file.environment, &traj, &start, &goal, nav.success_radius);
    Ok((traj, summary))
}

/// Start and goal drawn uniformly in free space, at least `min_separation`
/// apart. Uses its own stream so it never correlates with the walk.
pub fn random_endpoints(env: &Environment, seed: u64, min_separation: f64) -> (Point, Point) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut draw = || loop {
        let p = Point::new(rng.random_range(0.0..env.width), rng.random_range(0.0..env.height));
        if env.is_free(&p) {
            return p;
        }
    };
    loop {
        let (s, g) = (draw(), draw());
        if (g - s).norm() >= min_separation {
            return (s, g);
        }
    }
}

/// One sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub r: usize,
    pub k: usize,
    pub steps: usize,
    pub seed: u64,
    pub start: Point,
    pub goal: Point,
    pub reached: bool,
    pub success: bool,
    pub final_distance: Option<f64>,
    pub path_length: Option<f64>,
    pub path_ratio: Option<f64>,
    pub nav_steps: usize,
    pub touched_obstacle: bool,
    pub error: Option<String>,
}

fn axis<T: Copy>(values: &[T], fallback: T) -> Vec<T> {
    if values.is_empty() {
        vec![fallback]
    } else {
        values.to_vec()
    }
}

/// Train and navigate for every combination of the sweep axes and seeds.
/// Rows come out in axis order (r, k, steps, seed) and failures become
/// rows instead of aborting.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let env = cfg.environment()?;
    let s = &cfg.sweep;
    let rs = axis(&s.r, cfg.model.r);
    let ks = axis(&s.k, cfg.model.k);
    let steps_axis = axis(&s.steps, cfg.training.steps);
    let seeds = axis(&s.seeds, cfg.seed);

    let mut keys: Vec<(usize, u64)> = steps_axis.iter().flat_map(|&t| seeds.iter().map(move |&sd| (t, sd))).collect();
    keys.sort_unstable();
    keys.dedup();
    let walks: BTreeMap<(usize, u64), std::result::Result<(crate::sim::Sensor, Walk), String>> = keys
        .par_iter()
        .map(|&(t, sd)| ((t, sd), walk_for(cfg, &env, sd, t).map_err(|e| e.to_string())))
        .collect::<Vec<_>>()
        .into_iter()
        .collect();

    let mut cells = Vec::new();
    for &r in &rs {
        for &k in &ks {
            for &t in &steps_axis {
                for &sd in &seeds {
                    cells.push((r, k, t, sd));
                }
            }
        }
    }
    let rows = cells
        .par_iter()
        .map(|&(r, k, steps, seed)| {
            let (start, goal) = if s.random_endpoints {
                random_endpoints(&env, seed, s.min_separation)
            } else {
                (cfg.start(), cfg.goal())
            };
            let mut row = SweepRow {
                r,
                k,
                steps,
                seed,
                start,
                goal,
                reached: false,
                success: false,
                final_distance: None,
                path_length: None,
                path_ratio: None,
                nav_steps: 0,
                touched_obstacle: false,
                error: None,
            };
            let outcome = walks[&(steps, seed)].clone().and_then(|(sensor, walk)| {
                let model = fit_on_walk(cfg, &walk, r, k).map_err(|e| e.to_string())?;
                let meta = TrainingMeta {
                    seed,
                    steps,
                    speed: cfg.training.speed,
                    stalls: walk.stalls.len(),
                };
                let file = ModelFile::new(cfg.hash(), env.clone(), sensor, meta, model);
                run_navigation(&file, cfg, start, goal).map_err(|e| e.to_string())
            });
            match outcome {
                Ok((_, sum)) => {
                    row.reached = sum.reached;
                    row.success = sum.success;
                    row.final_distance = Some(sum.final_distance);
                    row.path_length = Some(sum.path_length);
                    row.path_ratio = sum.path_ratio;
                    row.nav_steps = sum.steps;
                    row.touched_obstacle = sum.touched_obstacle;
                }
                Err(e) => {
                    log::warn!("sweep cell r={r} k={k} steps={steps} seed={seed} failed: {e}");
                    row.error = Some(e);
                }
            }
            row
        })
        .collect();
    Ok(rows)
}

/// Isolated single-component extraction on the configured walk data.
pub fn isolated(cfg: &ExperimentConfig) -> Result<Vec<IsolatedComponent>> {
    let env = cfg.environment()?;
    let (_, walk) = walk_for(cfg, &env, cfg.seed, cfg.training.steps)?;
    let h = expand(&walk.perceptions, cfg.expansion()?)?;
    let tr = fit_sphering_with(&h, cfg.model.sphering)?;
    let z = apply_sphering(&tr, &h)?;
    let iso = &cfg.isolated;
    extract_isolated(&z, cfg.model.p, iso.count.min(z.dim()), iso.max_iter, iso.tol)
}

fn prepare(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

fn write(out: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
    let path = out.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

/// Writes the model file and training log into `out`.
pub fn cmd_train(cfg: &ExperimentConfig, out: &Path) -> Result<ModelFile> {
    let file = train(cfg)?;
    prepare(out)?;
    file.save(&out.join(MODEL_FILE))?;
    write(out, TRAIN_LOG_FILE, artifacts::train_log_csv(&file.model))?;
    Ok(file)
}

fn load_checked(cfg: &ExperimentConfig, model: &Path) -> Result<ModelFile> {
    let file = ModelFile::load(model)?;
    file.check_compatible(cfg)?;
    Ok(file)
}

/// Writes the trajectory CSV and a one-line summary.
pub fn cmd_navigate(cfg: &ExperimentConfig, model: &Path, out: &Path) -> Result<NavSummary> {
    let file = load_checked(cfg, model)?;
    let (traj, summary) = run_navigation(&file, cfg, cfg.start(), cfg.goal())?;
    prepare(out)?;
    write(out, TRAJECTORY_FILE, artifacts::trajectory_csv(&traj))?;
    write(out, SUMMARY_FILE, format!("{summary}\n"))?;
    Ok(summary)
}

/// Writes the feature-distance grid CSV and its pixmap rendering.
pub fn cmd_map(cfg: &ExperimentConfig, model: &Path, out: &Path) -> Result<DistanceMap> {
    let file = load_checked(cfg, model)?;
    let [nx, ny] = cfg.map.resolution;
    let map = feature_distance_map(&file.model, &file.environment, &file.sensor, &cfg.goal(), (nx, ny))?;
    prepare(out)?;
    write(out, GRID_FILE, artifacts::grid_csv(&map))?;
    write(out, IMAGE_FILE, artifacts::map_ppm(&map, &cfg.goal(), &cfg.hash()))?;
    Ok(map)
}

pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<SweepRow>> {
    let rows = sweep(cfg)?;
    prepare(out)?;
    write(out, SWEEP_FILE, artifacts::sweep_csv(&rows))?;
    Ok(rows)
}

pub fn cmd_isolated(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<IsolatedComponent>> {
    let comps = isolated(cfg)?;
    prepare(out)?;
    let (summary, vectors) = artifacts::isolated_csv(&comps);
    write(out, ISOLATED_FILE, summary)?;
    write(out, ISOLATED_VECTORS_FILE, vectors)?;
    Ok(comps)
}
