//! Feature-distance map for a place-cell model with the centred block,
//! written as CSV and PPM to the system temp directory.

use pfax::experiment::{artifacts, ExperimentConfig};
use pfax::sim::feature_distance_map;

const CONFIG: &str = r#"
seed = 4
[environment]
width = 1.0
height = 1.0
obstacle = [0.4, 0.35, 0.6, 0.65]
[sensor]
kind = "place_cells"
count = 50
[model]
sphering = "reduce"
r = 3
[training]
steps = 8000
[navigation]
goal = [0.85, 0.5]
"#;

fn main() -> pfax::Result<()> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let file = pfax::experiment::train(&cfg)?;
    let map = feature_distance_map(&file.model, &file.environment, &file.sensor, &cfg.goal(), (80, 80))?;
    let dir = std::env::temp_dir().join("pfax_feature_map");
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("map.csv"), artifacts::grid_csv(&map))?;
    std::fs::write(dir.join("map.ppm"), artifacts::map_ppm(&map, &cfg.goal(), &cfg.hash()))?;
    let max = map.values.iter().flatten().copied().fold(0.0, f64::max);
    println!("max feature distance {max:.3}; wrote {}", dir.display());
    Ok(())
}
