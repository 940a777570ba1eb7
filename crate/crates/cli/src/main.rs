use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cocs_core::harness::{
    read_summary, render_report, run_experiment, run_sweep, ExperimentConfig,
};
use cocs_core::par::Execution;
use cocs_core::Error;

#[derive(Parser)]
#[command(
    name = "cocs",
    version,
    about = "Run client-selection bandit experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write CSVs plus summary.json
    Run(Common),
    /// Run one experiment per value of a numeric config key
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Dotted config key or alias (`budget`, `tau_dead`)
        #[arg(long)]
        axis: String,
        /// Comma-separated values
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
    },
    /// Print the per-policy table of a finished experiment
    Report {
        /// Directory holding summary.json
        dir: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Seed list: `a..b` (inclusive), `a,b,c` or a single seed
    #[arg(long)]
    seeds: Option<String>,
    /// Worker threads for the (policy, seed) grid
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output directory; defaults to the config's output_dir or results/<name>
    #[arg(long)]
    out: Option<PathBuf>,
    /// Config override, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    quiet: bool,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn parse_seeds(raw: &str) -> Result<Vec<u64>, Failure> {
    let bad = || Failure::Config(format!("--seeds: cannot parse `{raw}`"));
    if let Some((a, b)) = raw.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    raw.split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|_| bad()))
        .collect()
}

fn load(common: &Common) -> Result<(ExperimentConfig, PathBuf), Failure> {
    if !common.config.is_file() {
        return Err(Failure::Config(format!(
            "config file `{}` does not exist",
            common.config.display()
        )));
    }
    let mut overrides = Vec::new();
    for o in &common.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("--set expects KEY=VALUE, got `{o}`")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    let mut config = ExperimentConfig::load(&common.config, &overrides)?;
    if let Some(raw) = &common.seeds {
        config.run.seeds = parse_seeds(raw)?;
        config.validate()?;
    }
    let out = common
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| Path::new("results").join(&config.name));
    Ok((config, out))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(common) => {
            let (config, out) = load(&common)?;
            let result = run_experiment(&config, Execution::from_jobs(common.jobs))?;
            let summary = result.write(&out)?;
            if !common.quiet {
                print!("{}", render_report(&summary));
                println!("wrote {} run(s) to {}", result.runs.len(), out.display());
            }
        }
        Command::Sweep {
            common,
            axis,
            values,
        } => {
            if values.is_empty() {
                return Err(Failure::Config("--values: need at least one value".into()));
            }
            let (config, out) = load(&common)?;
            let sweep = run_sweep(
                &config,
                &axis,
                &values,
                &out,
                Execution::from_jobs(common.jobs),
            )?;
            if !common.quiet {
                for p in &sweep.points {
                    let cells: Vec<String> = p
                        .cumulative_utility
                        .iter()
                        .map(|(k, v)| format!("{k}={v:.3}"))
                        .collect();
                    println!("{} = {}: {}", sweep.key, p.value, cells.join(" "));
                }
                println!("wrote sweep to {}", out.display());
            }
        }
        Command::Report { dir } => {
            let summary = read_summary(&dir)?;
            print!("{}", render_report(&summary));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
