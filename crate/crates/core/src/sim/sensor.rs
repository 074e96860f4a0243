use std::f64::consts::TAU;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{Environment, Point};
use crate::error::{PfaxError, Result};

/// Gaussian place cells with a common width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceCellSensor {
    pub centers: Vec<Point>,
    pub sigma: f64,
}

impl PlaceCellSensor {
    pub fn new(centers: Vec<Point>, sigma: f64) -> Result<Self> {
        if centers.is_empty() || !(sigma > 0.0 && sigma.is_finite()) {
            return Err(PfaxError::Config(format!(
                "place cells need at least one center and sigma > 0 (got {} centers, sigma {sigma})",
                centers.len()
            )));
        }
        Ok(Self { centers, sigma })
    }

    /// `count` centers drawn uniformly on the table.
    pub fn random(env: &Environment, count: usize, sigma: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centers = (0..count)
            .map(|_| Point::new(rng.random_range(0.0..env.width), rng.random_range(0.0..env.height)))
            .collect();
        Self::new(centers, sigma)
    }

    /// `exp(-|pos - c_i|^2 / (2 sigma^2))` for every center.
    pub fn readout(&self, pos: &Point) -> DVector<f64> {
        let s2 = 2.0 * self.sigma * self.sigma;
        DVector::from_iterator(
            self.centers.len(),
            self.centers.iter().map(|c| (-(pos - c).norm_squared() / s2).exp()),
        )
    }
}

/// Visible angular fraction of each wall segment in a full circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallSensor {
    pub rays: usize,
}

impl WallSensor {
    pub fn new(rays: usize) -> Result<Self> {
        if rays < 360 {
            return Err(PfaxError::Config(format!("wall sensor needs at least 360 rays, got {rays}")));
        }
        Ok(Self { rays })
    }

    /// Casts `rays` equiangular rays; each contributes `1 / rays` to the
    /// first segment it hits. Ties go to the lower segment index.
    pub fn readout(&self, env: &Environment, pos: &Point) -> Result<DVector<f64>> {
        if !env.on_table(pos) {
            return Err(PfaxError::InvalidPosition {
                x: pos.x,
                y: pos.y,
                reason: "outside the table",
            });
        }
        if env.in_obstacle(pos) {
            return Err(PfaxError::InvalidPosition {
                x: pos.x,
                y: pos.y,
                reason: "inside the obstacle",
            });
        }
        let walls = env.walls();
        let mut counts = vec![0usize; walls.len()];
        for k in 0..self.rays {
            let angle = (k as f64 + 0.5) * TAU / self.rays as f64;
            let (s, c) = angle.sin_cos();
            let dir = Point::new(c, s);
            let mut best: Option<(usize, f64)> = None;
            for (i, w) in walls.iter().enumerate() {
                if let Some(t) = w.ray_hit(pos, &dir) {
                    if best.is_none_or(|(_, bt)| t < bt) {
                        best = Some((i, t));
                    }
                }
            }
            if let Some((i, _)) = best {
                counts[i] += 1;
            }
        }
        let total = self.rays as f64;
        Ok(DVector::from_iterator(walls.len(), counts.into_iter().map(|c| c as f64 / total)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sensor {
    PlaceCells(PlaceCellSensor),
    Wall(WallSensor),
}

impl Sensor {
    pub fn readout(&self, env: &Environment, pos: &Point) -> Result<DVector<f64>> {
        match self {
            Sensor::PlaceCells(s) => Ok(s.readout(pos)),
            Sensor::Wall(s) => s.readout(env, pos),
        }
    }

    pub fn dim(&self, env: &Environment) -> usize {
        match self {
            Sensor::PlaceCells(s) => s.centers.len(),
            Sensor::Wall(_) => env.walls().len(),
        }
    }

    /// Whether the readout exists at `pos` (the wall sensor is undefined
    /// inside the obstacle).
    pub fn defined_at(&self, env: &Environment, pos: &Point) -> bool {
        match self {
            Sensor::PlaceCells(_) => env.on_table(pos),
            Sensor::Wall(_) => env.is_free(pos),
        }
    }
}
