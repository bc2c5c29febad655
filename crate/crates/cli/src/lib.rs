//! Command-line runner for the CHSH betting games: single runs, seeded
//! sweeps, an exact oracle report and trajectory verification.

pub mod config;
pub mod error;
pub mod output;
pub mod report;
pub mod sweep;
pub mod verify;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use chsh_core::runner::{self, Trajectory};
use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "chsh",
    version,
    about = "Simulate and check game-theoretic CHSH tests"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one game and write trajectory.csv and summary.json.
    Simulate {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a grid of configurations across seeds; writes sweep.csv,
    /// sweep_aggregate.csv and sweep.json.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        /// Comma-separated; defaults to the config's seed.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print exact reference values as JSON.
    Oracle,
    /// Recompute every statistic of a stride-1 trajectory CSV.
    Verify { csv: PathBuf },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_run(config: &RunConfig, trajectory: &Trajectory, out: &Path) -> Result<()> {
    create_dir(out)?;
    if config.output.csv() {
        output::write_csv(create(&out.join("trajectory.csv"))?, &trajectory.snapshots)?;
    }
    if config.output.json() {
        let path = out.join("summary.json");
        let summary = output::RunSummaryJson::new(config, trajectory);
        serde_json::to_writer_pretty(create(&path)?, &summary)
            .map_err(|e| CliError::io(&path, e.into()))?;
    }
    Ok(())
}

pub fn simulate(config_path: &Path, out: &Path) -> Result<()> {
    let config = RunConfig::load(config_path)?;
    let trajectory = runner::run_game(&config.game(), &config.options(), config.seed)?;
    write_run(&config, &trajectory, out)
}

pub fn sweep(config_path: &Path, grid_path: &Path, seeds: &[u64], out: &Path) -> Result<usize> {
    let base = RunConfig::load(config_path)?;
    let grid = sweep::Grid::load(grid_path)?;
    let seeds = if seeds.is_empty() {
        vec![base.seed]
    } else {
        seeds.to_vec()
    };
    let rows = sweep::run_sweep(&base, &grid, &seeds)?;
    create_dir(out)?;
    sweep::write_rows(create(&out.join("sweep.csv"))?, &rows)?;
    let aggregates = sweep::aggregate(&rows);
    sweep::write_rows(create(&out.join("sweep_aggregate.csv"))?, &aggregates)?;
    let json = sweep::SweepJson {
        schema_version: output::SCHEMA_VERSION,
        seeds: &seeds,
        rows: &rows,
        aggregates: &aggregates,
    };
    let path = out.join("sweep.json");
    serde_json::to_writer_pretty(create(&path)?, &json)
        .map_err(|e| CliError::io(&path, e.into()))?;
    Ok(rows.iter().filter(|r| r.error.is_some()).count())
}

/// Run a parsed command. Returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Simulate { config, out } => simulate(&config, &out),
        Command::Sweep {
            config,
            grid,
            seeds,
            out,
        } => sweep(&config, &grid, &seeds, &out).map(|failed| {
            if failed > 0 {
                eprintln!("{failed} sweep cell(s) failed; see the error column of sweep.csv");
            }
        }),
        Command::Oracle => report::oracle_report().map(|r| {
            println!(
                "{}",
                serde_json::to_string_pretty(&r).expect("report serializes")
            );
        }),
        Command::Verify { csv } => verify::verify_file(&csv).map(|r| {
            println!(
                "verified {} {} rounds: {}",
                r.rounds,
                r.protocol,
                r.checked.join(", ")
            );
        }),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            match e.round() {
                Some(n) => eprintln!("error at round {n}: {e}"),
                None => eprintln!("error: {e}"),
            }
            e.exit_code()
        }
    }
}
