use std::collections::VecDeque;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::{Environment, Point};
use super::sensor::Sensor;
use crate::control::{build_control_problem, goal_features, solve_norm_constrained, ControlConstraint};
use crate::error::{PfaxError, Result};
use crate::pfax::PfaxModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavigationParams {
    pub start: Point,
    pub goal: Point,
    pub speed: f64,
    pub max_steps: usize,
    /// Stop once `||m(t) - m*||` falls to this value.
    pub goal_tol: f64,
    /// Block moves that would touch the obstacle.
    pub collision: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// The constrained solver had no valid candidate and rescaled the
    /// unconstrained command.
    Fallback,
    /// The solver failed; the agent stayed in place.
    SolverError,
    /// The command would have left the table; the agent stayed.
    LeftTable,
    /// The command would have touched the obstacle; the agent stayed.
    Collision,
    /// The command entered the obstacle where the sensor is undefined;
    /// navigation stopped.
    EnteredObstacle,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Fallback => "fallback",
            EventKind::SolverError => "solver_error",
            EventKind::LeftTable => "left_table",
            EventKind::Collision => "collision",
            EventKind::EnteredObstacle => "entered_obstacle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavEvent {
    pub step: usize,
    pub kind: EventKind,
    pub detail: String,
}

/// Result of a navigation run.
///
/// `feature_distances[i]` belongs to `positions[i]`, and `controls[i]` is
/// the command issued at `positions[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub positions: Vec<Point>,
    pub controls: Vec<Point>,
    pub feature_distances: Vec<f64>,
    pub events: Vec<NavEvent>,
    pub reached: bool,
}

impl Trajectory {
    pub fn final_position(&self) -> Point {
        *self.positions.last().expect("trajectory has a start point")
    }

    pub fn path_length(&self) -> f64 {
        self.positions.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Path length over the straight-line distance between the endpoints
    /// given, or `None` when they coincide.
    pub fn path_ratio(&self, start: &Point, goal: &Point) -> Option<f64> {
        let straight = (goal - start).norm();
        (straight > 0.0).then(|| self.path_length() / straight)
    }
}

fn features_at(model: &PfaxModel, env: &Environment, sensor: &Sensor, pos: &Point) -> Result<(DVector<f64>, DVector<f64>)> {
    let z = model.sphere(&sensor.readout(env, pos)?)?;
    let m = model.extraction.tr_mul(&z);
    Ok((z, m))
}

fn stacked(history: &VecDeque<DVector<f64>>) -> DVector<f64> {
    let dim = history[0].len();
    let mut out = DVector::zeros(dim * history.len());
    for (i, v) in history.iter().enumerate() {
        out.rows_mut(i * dim, dim).copy_from(v);
    }
    out
}

/// Closed-loop goal-directed navigation with constant speed.
///
/// The histories are seeded by standing still at the start for `p` steps.
/// Solver failures and blocked moves are recorded as events and never
/// abort the run.
pub fn navigate(
    model: &PfaxModel,
    env: &Environment,
    sensor: &Sensor,
    params: &NavigationParams,
) -> Result<Trajectory> {
    let NavigationParams {
        start,
        goal,
        speed,
        max_steps,
        goal_tol,
        collision,
    } = *params;
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(PfaxError::Config(format!("speed = {speed} must be positive")));
    }
    if !(goal_tol >= 0.0) {
        return Err(PfaxError::Config(format!("goal_tol = {goal_tol} must be non-negative")));
    }
    if model.n_u() != 2 {
        return Err(PfaxError::Incompatible(format!(
            "model was trained with {}-dimensional controls, navigation needs 2",
            model.n_u()
        )));
    }
    let valid_start = if collision { env.is_free(&start) } else { sensor.defined_at(env, &start) };
    if !valid_start {
        return Err(PfaxError::InvalidPosition {
            x: start.x,
            y: start.y,
            reason: "start is not a valid agent position",
        });
    }
    let m_star = goal_features(model, &sensor.readout(env, &goal)?)?;
    let (z0, _) = features_at(model, env, sensor, &start)?;
    let mut z_hist: VecDeque<DVector<f64>> = std::iter::repeat_n(z0, model.p).collect();
    let mut u_hist: VecDeque<DVector<f64>> = std::iter::repeat_n(DVector::zeros(2), model.q - 1).collect();

    let mut traj = Trajectory {
        positions: vec![start],
        controls: Vec::new(),
        feature_distances: Vec::new(),
        events: Vec::new(),
        reached: false,
    };
    let mut pos = start;
    for step in 0.. {
        let (z, m) = features_at(model, env, sensor, &pos)?;
        let dist = (&m - &m_star).norm();
        traj.feature_distances.push(dist);
        if dist <= goal_tol {
            traj.reached = true;
            break;
        }
        if step == max_steps {
            break;
        }
        z_hist.pop_back();
        z_hist.push_front(z);
        let past: Vec<_> = u_hist.iter().cloned().collect();
        let command = build_control_problem(
            model,
            &m_star,
            &stacked(&z_hist),
            &past,
            ControlConstraint::NormEquality(speed),
        )
        .and_then(|prob| solve_norm_constrained(&prob));
        let u = match command {
            Ok(cmd) => {
                if let Some(reason) = cmd.fallback {
                    traj.events.push(NavEvent {
                        step,
                        kind: EventKind::Fallback,
                        detail: reason,
                    });
                }
                Point::new(cmd.u[0], cmd.u[1])
            }
            Err(e) => {
                traj.events.push(NavEvent {
                    step,
                    kind: EventKind::SolverError,
                    detail: e.to_string(),
                });
                Point::zeros()
            }
        };
        let next = pos + u;
        let blocked = if !env.on_table(&next) {
            Some(EventKind::LeftTable)
        } else if collision && env.move_hits_obstacle(&pos, &next) {
            Some(EventKind::Collision)
        } else {
            None
        };
        traj.controls.push(u);
        if let Some(kind) = blocked {
            traj.events.push(NavEvent {
                step,
                kind,
                detail: format!("blocked move to ({:.6}, {:.6})", next.x, next.y),
            });
        } else if !sensor.defined_at(env, &next) {
            traj.controls.pop();
            traj.events.push(NavEvent {
                step,
                kind: EventKind::EnteredObstacle,
                detail: format!("sensor undefined at ({:.6}, {:.6})", next.x, next.y),
            });
            break;
        } else {
            pos = next;
        }
        let realized = pos - traj.final_position();
        traj.positions.push(pos);
        if model.q > 1 {
            u_hist.pop_back();
            u_hist.push_front(DVector::from_column_slice(realized.as_slice()));
        }
    }
    Ok(traj)
}

/// Feature-space distance to the goal on a grid of cell centers, row-major
/// from the bottom row. Cells where the sensor is undefined hold `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMap {
    pub nx: usize,
    pub ny: usize,
    pub width: f64,
    pub height: f64,
    pub values: Vec<Option<f64>>,
}

impl DistanceMap {
    pub fn center(&self, ix: usize, iy: usize) -> Point {
        Point::new(
            (ix as f64 + 0.5) * self.width / self.nx as f64,
            (iy as f64 + 0.5) * self.height / self.ny as f64,
        )
    }

    pub fn get(&self, ix: usize, iy: usize) -> Option<f64> {
        self.values[iy * self.nx + ix]
    }

    /// Cell containing `p`, clamped to the grid.
    pub fn cell_of(&self, p: &Point) -> (usize, usize) {
        let ix = ((p.x / self.width * self.nx as f64) as usize).min(self.nx - 1);
        let iy = ((p.y / self.height * self.ny as f64) as usize).min(self.ny - 1);
        (ix, iy)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, Option<f64>)> + '_ {
        (0..self.ny).flat_map(move |iy| (0..self.nx).map(move |ix| (self.center(ix, iy), self.get(ix, iy))))
    }
}

/// `||m(point) - m*||` over the table, including obstacle cells wherever
/// the sensor is defined there.
pub fn feature_distance_map(
    model: &PfaxModel,
    env: &Environment,
    sensor: &Sensor,
    goal: &Point,
    resolution: (usize, usize),
) -> Result<DistanceMap> {
    let (nx, ny) = resolution;
    if nx < 2 || ny < 2 {
        return Err(PfaxError::Config(format!("map resolution {nx} x {ny} must be at least 2 x 2")));
    }
    let m_star = goal_features(model, &sensor.readout(env, goal)?)?;
    let mut map = DistanceMap {
        nx,
        ny,
        width: env.width,
        height: env.height,
        values: Vec::new(),
    };
    map.values = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let p = map.center(idx % nx, idx / nx);
            if !sensor.defined_at(env, &p) {
                return Ok(None);
            }
            let (_, m) = features_at(model, env, sensor, &p)?;
            Ok(Some((m - &m_star).norm()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(map)
}
