use std::path::PathBuf;
use std::process::ExitCode;

use als_harness::experiments::{run_experiment, ExperimentSpec, Pipeline};
use als_harness::io::write_report;
use anyhow::{Context, Result};
use clap::Parser;

/// Active regression and row-sampling experiments.
#[derive(Debug, Parser)]
#[command(name = "als", version)]
struct Cli {
    #[command(subcommand)]
    pipeline: Option<Pipeline>,
    /// Number of seeds, run as `seed0, seed0+1, …`.
    #[arg(long, global = true, default_value_t = 10)]
    seeds: u64,
    #[arg(long, global = true, default_value_t = 0)]
    seed0: u64,
    /// Largest `n·d` for which the full-solve baseline is computed.
    #[arg(long, global = true, default_value_t = 5_000_000)]
    baseline_limit: usize,
    /// Re-run the experiment recorded in a report or spec file.
    #[arg(long, global = true)]
    replay: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write the trials as CSV.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
}

fn spec_of(cli: &Cli) -> Result<ExperimentSpec> {
    if let Some(path) = &cli.replay {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let spec = value.get("config").cloned().unwrap_or(value);
        return serde_json::from_value(spec).with_context(|| format!("{} holds no experiment spec", path.display()));
    }
    let pipeline = cli
        .pipeline
        .clone()
        .context("name a pipeline subcommand or pass --replay")?;
    Ok(ExperimentSpec {
        pipeline,
        seeds: (cli.seed0..cli.seed0 + cli.seeds).collect(),
        baseline_limit: cli.baseline_limit,
    })
}

fn run(cli: Cli) -> Result<()> {
    let spec = spec_of(&cli)?;
    let report = run_experiment(&spec)?;
    match &cli.out {
        Some(path) => write_report(path, &report)?,
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    if let Some(path) = &cli.csv {
        report.write_csv(path)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("als: {e:#}");
            ExitCode::FAILURE
        }
    }
}
