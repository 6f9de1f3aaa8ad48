//! `lrk`: reproduces eigenvalue-decay and perturbation tables, runs the
//! verification suite and Voronoi diagnostics, writing CSV files.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 usage, config or
//! runtime error.

mod commands;
mod config;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lowrank_kriging::spectral::set_max_matrix_bytes;

use config::Config;

#[derive(Debug, Parser)]
#[command(name = "lrk", version, about = "Low-rank kriging experiments")]
struct Cli {
    /// Flat key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for random designs and randomized checks (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Ceiling on a single dense matrix allocation, in bytes.
    #[arg(long, global = true)]
    max_matrix_bytes: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues, cumulative and tail sums per kernel: spectrum_<kernel>.csv.
    EigenDecay,
    /// Condition numbers and perturbation MSE over k_list x tau_list: table2.csv.
    Table2,
    /// Run the verification checks: verify_report.csv.
    Verify {
        /// Run only the named check(s); repeat or comma-separate.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
    /// Voronoi cell areas and diameters: voronoi_cells.csv, voronoi_summary.csv.
    Voronoi,
}

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Lib(#[from] lowrank_kriging::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl From<config::ConfigError> for Failure {
    fn from(e: config::ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn load(cli: &Cli) -> Result<Config, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    if let Some(dir) = &cli.output {
        cfg.output_dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(bytes) = cli.max_matrix_bytes {
        cfg.max_matrix_bytes = bytes;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let cfg = load(cli)?;
    set_max_matrix_bytes(cfg.max_matrix_bytes);
    let written = match &cli.command {
        Command::EigenDecay => commands::eigen_decay(&cfg)?,
        Command::Table2 => commands::table2(&cfg)?,
        Command::Voronoi => commands::voronoi(&cfg)?,
        Command::Verify { only } => {
            let outcome = verify::run(&cfg, only)?;
            for (name, rows, ok) in &outcome.summary {
                println!("{} {name} ({rows} rows)", if *ok { "PASS" } else { "FAIL" });
            }
            let failed = outcome.rows.iter().filter(|r| !r.pass).count();
            println!(
                "{} checks, {} rows, {failed} failing rows",
                outcome.summary.len(),
                outcome.rows.len()
            );
            println!("wrote {}", outcome.report.display());
            return Ok(outcome.passed());
        }
    };
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("lrk: {e}");
            ExitCode::from(2)
        }
    }
}
