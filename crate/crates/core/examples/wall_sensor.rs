//! Visible angular fraction of each wall segment around the centred block.

use pfax::sim::{Environment, Point, WallSensor};

fn main() -> pfax::Result<()> {
    let env = Environment::unit_square_with_obstacle();
    let sensor = WallSensor::new(3600)?;
    let names = [
        "table bottom", "table right", "table top", "table left",
        "block bottom", "block right", "block top", "block left",
    ];
    for pos in [Point::new(0.2, 0.5), Point::new(0.5, 0.1), Point::new(0.9, 0.9)] {
        let x = sensor.readout(&env, &pos)?;
        println!("at ({:.1}, {:.1}):", pos.x, pos.y);
        for (name, v) in names.iter().zip(x.iter()) {
            println!("  {name:<13} {v:.4}");
        }
    }
    Ok(())
}
