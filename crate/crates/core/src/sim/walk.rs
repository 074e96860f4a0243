use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::geometry::{Environment, Point};
use super::sensor::Sensor;
use crate::error::{PfaxError, Result};
use crate::signal::TimeSeries;

const MAX_REDRAWS: usize = 100;

/// Training data from a constant-speed random walk.
///
/// `perceptions[t]` is the readout at `positions[t]` and `deltas[t]` is the
/// move made right after it, so `positions[t + 1] = positions[t] + deltas[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Walk {
    pub perceptions: TimeSeries,
    pub deltas: TimeSeries,
    /// `steps + 1` points.
    pub positions: Vec<Point>,
    /// Steps at which no valid direction was found and the agent stayed.
    pub stalls: Vec<usize>,
}

fn random_free_point(env: &Environment, rng: &mut ChaCha8Rng) -> Point {
    loop {
        let p = Point::new(rng.random_range(0.0..env.width), rng.random_range(0.0..env.height));
        if env.is_free(&p) {
            return p;
        }
    }
}

pub fn random_walk(env: &Environment, sensor: &Sensor, steps: usize, speed: f64, seed: u64) -> Result<Walk> {
    if steps == 0 {
        return Err(PfaxError::Config("random walk needs at least one step".into()));
    }
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(PfaxError::Config(format!("speed = {speed} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos = random_free_point(env, &mut rng);
    let mut positions = Vec::with_capacity(steps + 1);
    let mut deltas = DMatrix::zeros(steps, 2);
    let mut stalls = Vec::new();
    positions.push(pos);
    for t in 0..steps {
        let mut moved = None;
        for _ in 0..MAX_REDRAWS {
            let (s, c) = rng.random_range(0.0..TAU).sin_cos();
            let delta = Point::new(c, s) * speed;
            let next = pos + delta;
            if env.on_table(&next) && !env.move_hits_obstacle(&pos, &next) {
                moved = Some((next, delta));
                break;
            }
        }
        match moved {
            Some((next, delta)) => {
                deltas[(t, 0)] = delta.x;
                deltas[(t, 1)] = delta.y;
                pos = next;
            }
            None => {
                log::warn!("random walk stalled at step {t} ({:.4}, {:.4})", pos.x, pos.y);
                stalls.push(t);
            }
        }
        positions.push(pos);
    }
    let readouts = positions[..steps]
        .par_iter()
        .map(|p| sensor.readout(env, p))
        .collect::<Result<Vec<_>>>()?;
    let dim = readouts[0].len();
    let perceptions = DMatrix::from_fn(steps, dim, |t, j| readouts[t][j]);
    Ok(Walk {
        perceptions: TimeSeries::new(perceptions)?,
        deltas: TimeSeries::new(deltas)?,
        positions,
        stalls,
    })
}
