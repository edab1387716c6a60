//! `fracper`: energies, exact minimisers, level-set functions, property
//! suites and experiments from a JSON configuration.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracper_core::{Error, Result};

use crate::commands::Options;
use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "fracper", version, about = "Discrete fractional perimeter lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory for JSON, CSV and PGM artefacts.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads; never changes the output.
    #[arg(long, global = true, value_name = "K")]
    threads: Option<usize>,
    /// Ignore everything beyond the box (default).
    #[arg(long, global = true, conflicts_with = "ambient")]
    boxed: bool,
    /// Include the far field, as configured under "ambient".
    #[arg(long, global = true)]
    ambient: bool,
    /// Write a PGM per sweep point.
    #[arg(long, global = true)]
    snapshots: bool,
    /// Cap on free cells for enumeration.
    #[arg(long, global = true, value_name = "N")]
    max_free_cells: Option<usize>,
    /// Corrupt one level of the family (testing only).
    #[arg(long, global = true, hide = true)]
    inject_fault: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Energy breakdown of the configured set or function.
    Energy,
    /// Minimal and maximal minimisers for the configured set datum.
    Minimise,
    /// Minimal function assembled from minimal level sets.
    Levelset,
    /// Randomised property suites.
    Verify,
    /// Ring fill/empty sweep (CSV).
    Yinyang,
    /// Sector instance with several minimisers.
    Sector,
    /// Timings of kernel fill, energy and one solve (CSV).
    Bench,
}

fn run(cli: &Cli) -> Result<(String, bool)> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None if matches!(cli.command, Command::Verify | Command::Sector | Command::Bench) => RunConfig::default(),
        None => return Err(Error::InvalidArgument("--config is required for this command".into())),
    };
    let opts = Options {
        out: cli.out.clone(),
        seed: cli.seed,
        ambient: cli.ambient,
        snapshots: cli.snapshots,
        max_free_cells: cli.max_free_cells,
        inject_fault: cli.inject_fault,
    };
    Ok(match cli.command {
        Command::Energy => (commands::energy(&cfg, &opts)?, true),
        Command::Minimise => (commands::minimise_cmd(&cfg, &opts)?, true),
        Command::Levelset => (commands::levelset(&cfg, &opts)?, true),
        Command::Verify => {
            let (text, report) = commands::verify(&cfg, &opts)?;
            (text, report.failed == 0)
        }
        Command::Yinyang => (commands::yinyang(&cfg, &opts)?, true),
        Command::Sector => (commands::sector(&cfg, &opts)?, true),
        Command::Bench => (commands::bench(&cfg, &opts)?, true),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok((text, ok)) => {
            print!("{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: property suites reported failures");
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_internal() { 3 } else { 2 })
        }
    }
}
