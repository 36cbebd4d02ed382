use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use bohmsim::config::Experiment;
use bohmsim::output::render_report;
use bohmsim::{parse_config, run, write_outputs, ExperimentConfig};

#[derive(Parser)]
#[command(name = "bohmsim", version, about = "Bohmian trajectory experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write series.csv, trajectories.csv and report.txt.
    Run {
        config: PathBuf,
        /// Output directory (overrides [output] directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed (overrides [run] seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Print nothing unless a contract fails.
        #[arg(long)]
        quiet: bool,
    },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
    /// List the available experiments.
    ListExperiments,
}

fn load(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = matches!(cli.command, Command::Run { quiet: true, .. });
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if quiet { "error" } else { "warn" }))
        .init();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::ListExperiments => {
            for e in Experiment::ALL {
                println!("{:<20} {}", e.name(), e.description());
            }
            Ok(true)
        }
        Command::Validate { config } => {
            let c = load(&config)?;
            println!("{}: ok ({})", config.display(), c.experiment);
            Ok(true)
        }
        Command::Run {
            config,
            out,
            seed,
            quiet,
        } => {
            let mut c = load(&config)?;
            if let Some(s) = seed {
                c.run.seed = s;
            }
            let dir = out
                .or_else(|| c.output.directory.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(c.experiment.name()));
            let report = run(&c)?;
            let files = write_outputs(&c, &report, &dir)?;
            if !quiet || !report.passed() {
                print!("{}", render_report(&report, &files));
            }
            Ok(report.passed())
        }
    }
}
