//! Train on a place-cell random walk and steer to a goal with constant
//! speed.

use pfax::pfax::{fit_pfax, PfaxParams};
use pfax::preprocessing::{ExpansionSpec, SpheringPolicy};
use pfax::sim::{
    navigate, random_walk, Environment, NavigationParams, PlaceCellSensor, Point, Sensor, DEFAULT_GOAL_TOL,
    DEFAULT_MAX_STEPS, DEFAULT_SPEED,
};

fn main() -> pfax::Result<()> {
    let env = Environment::unit_square();
    let sensor = Sensor::PlaceCells(PlaceCellSensor::random(&env, 50, 0.2, 1)?);
    let walk = random_walk(&env, &sensor, 10_000, DEFAULT_SPEED, 1)?;
    let params = PfaxParams {
        expansion: ExpansionSpec::linear(),
        sphering: SpheringPolicy::Reduce,
        p: 1,
        q: 1,
        r: 2,
        k: 0,
    };
    let model = fit_pfax(&walk.perceptions, &walk.deltas, &params)?;
    println!("sphered dimension {}, extracted {}", model.n(), model.r());

    let (start, goal) = (Point::new(0.15, 0.2), Point::new(0.8, 0.75));
    let nav = NavigationParams {
        start,
        goal,
        speed: DEFAULT_SPEED,
        max_steps: DEFAULT_MAX_STEPS,
        goal_tol: DEFAULT_GOAL_TOL,
        collision: true,
    };
    let traj = navigate(&model, &env, &sensor, &nav)?;
    let end = traj.final_position();
    println!(
        "{} after {} steps at ({:.3}, {:.3}), {:.4} from the goal, path ratio {:.3}",
        if traj.reached { "reached" } else { "stopped" },
        traj.controls.len(),
        end.x,
        end.y,
        (end - goal).norm(),
        traj.path_ratio(&start, &goal).unwrap_or(f64::NAN)
    );
    Ok(())
}
