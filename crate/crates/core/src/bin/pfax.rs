use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pfax::experiment::{self, ExperimentConfig, Overrides};
use pfax::experiment::commands::MODEL_FILE;
use pfax::Result;

#[derive(Parser)]
#[command(version, about = "Predictable feature analysis experiments in a 2D navigation world")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment TOML file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to the config's `out`, then `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Random walk and model fit; writes model.json and train_log.csv.
    Train(Common),
    /// Navigate start to goal with a trained model.
    Navigate {
        #[command(flatten)]
        common: Common,
        /// Model file (defaults to model.json in the output directory).
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Feature-distance map to the goal as CSV and PPM.
    Map {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Train and navigate over the configured parameter axes and seeds.
    Sweep(Common),
    /// Extract isolated single autoregressive components from walk data.
    Isolated(Common),
}

fn setup(common: &Common) -> Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    cfg.apply(&common.overrides)?;
    let out = common
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok((cfg, out))
}

fn model_path(model: Option<PathBuf>, out: &Path) -> PathBuf {
    model.unwrap_or_else(|| out.join(MODEL_FILE))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(common) => {
            let (cfg, out) = setup(&common)?;
            let file = experiment::cmd_train(&cfg, &out)?;
            println!(
                "trained r={} n={} p={} q={} k={} -> {}",
                file.model.r(),
                file.model.n(),
                file.model.p,
                file.model.q,
                file.model.k,
                out.join(MODEL_FILE).display()
            );
        }
        Command::Navigate { common, model } => {
            let (cfg, out) = setup(&common)?;
            let summary = experiment::cmd_navigate(&cfg, &model_path(model, &out), &out)?;
            println!("{summary}");
        }
        Command::Map { common, model } => {
            let (cfg, out) = setup(&common)?;
            let map = experiment::cmd_map(&cfg, &model_path(model, &out), &out)?;
            let masked = map.values.iter().filter(|v| v.is_none()).count();
            println!("map {}x{} ({masked} masked cells) -> {}", map.nx, map.ny, out.display());
        }
        Command::Sweep(common) => {
            let (cfg, out) = setup(&common)?;
            let rows = experiment::cmd_sweep(&cfg, &out)?;
            let ok = rows.iter().filter(|r| r.success).count();
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            println!("sweep: {} rows, {ok} successful, {failed} errors", rows.len());
        }
        Command::Isolated(common) => {
            let (cfg, out) = setup(&common)?;
            for (i, c) in experiment::cmd_isolated(&cfg, &out)?.iter().enumerate() {
                println!(
                    "component {i}: error {:.6e}, {} iterations, converged {}",
                    c.error, c.iterations, c.converged
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
