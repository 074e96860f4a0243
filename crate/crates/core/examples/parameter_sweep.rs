//! Success rate against r and |T| over a few seeds, printed as CSV.

use pfax::experiment::{artifacts, sweep, ExperimentConfig};

const CONFIG: &str = r#"
[sensor]
kind = "place_cells"
count = 50
[model]
sphering = "reduce"
[sweep]
r = [2, 4]
steps = [1000, 10000]
seeds = [0, 1, 2, 3, 4]
random_endpoints = true
"#;

fn main() -> pfax::Result<()> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let rows = sweep(&cfg)?;
    print!("{}", artifacts::sweep_csv(&rows));
    for (r, steps) in [(2, 1000), (2, 10000), (4, 1000), (4, 10000)] {
        let ok = rows.iter().filter(|x| x.r == r && x.steps == steps && x.success).count();
        eprintln!("r = {r}, |T| = {steps}: {ok}/5");
    }
    Ok(())
}
