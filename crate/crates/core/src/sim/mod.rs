//! Deterministic 2D point-agent world: a rectangular table with an optional
//! rectangular obstacle, place-cell and wall-fraction sensors, random-walk
//! training data and closed-loop navigation on a fitted model.

mod geometry;
mod navigate;
mod sensor;
mod walk;

pub use geometry::{Environment, Point, Rect, Segment};
pub use navigate::{
    feature_distance_map, navigate, DistanceMap, EventKind, NavEvent, NavigationParams, Trajectory,
};
pub use sensor::{PlaceCellSensor, Sensor, WallSensor};
pub use walk::{random_walk, Walk};

pub const DEFAULT_SPEED: f64 = 0.02;
pub const DEFAULT_GOAL_TOL: f64 = 0.05;
pub const DEFAULT_MAX_STEPS: usize = 2000;
pub const DEFAULT_RAYS: usize = 3600;

/// Place-cell width relative to the shorter table side.
pub const PLACE_CELL_SIGMA_FRACTION: f64 = 0.2;
