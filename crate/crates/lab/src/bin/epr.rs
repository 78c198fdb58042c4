use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use epr_lab::records::RecordFormat;
use epr_lab::run::summary;
use epr_lab::{run, write_outputs, LabError, RunOptions, Scenario};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Records {
    Csv,
    Jsonl,
}

/// Run an EPR/Bell scenario and write report.json.
#[derive(Debug, Parser)]
#[command(name = "epr", version)]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of trials per setting pair.
    #[arg(long)]
    trials: Option<u64>,
    /// Exact analyses only; skip sampling.
    #[arg(long)]
    exact: bool,
    /// Include the unframed joint state in the report.
    #[arg(long)]
    god_view: bool,
    /// Sampling worker threads.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Also write per-trial records.
    #[arg(long, value_enum)]
    records: Option<Records>,
    /// Add wall-clock stage timings to the report (breaks byte-reproducibility).
    #[arg(long)]
    timings: bool,
    /// Suppress the summary tables.
    #[arg(long, short)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), LabError> {
    let scenario = Scenario::load(&cli.scenario)?;
    let records = cli.records.map(|r| match r {
        Records::Csv => RecordFormat::Csv,
        Records::Jsonl => RecordFormat::Jsonl,
    });
    let opts = RunOptions {
        seed: cli.seed,
        trials: cli.trials,
        exact: cli.exact,
        god_view: cli.god_view,
        workers: cli.workers.map(|w| w as usize),
        records,
        timings: cli.timings,
    };
    let output = run(&scenario, &opts)?;
    let written = write_outputs(&cli.out, &output, records)?;
    if !cli.quiet {
        print!("{}", summary(&output.report));
        for path in written {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
