//! `rach`: analyze, optimize and simulate RACH resource dedication scenarios.

mod commands;
mod error;
mod input;
mod output;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CompareStrategy, Emit, Method, SimArgs, SimulateOpts, SweepOpts};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "rach", version, about = "RACH resource dedication for grouped random access")]
struct Cli {
    /// Print the full run report as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form collision rates, densities and delays.
    Analyze {
        /// Scenario file (TOML).
        scenario: PathBuf,
        /// Dedicated RAOs: counts in file order (`3600,7200`) or `id=count` pairs.
        #[arg(long)]
        plan: Option<String>,
    },
    /// Compute a dedication plan.
    Optimize {
        /// Scenario file (TOML).
        scenario: PathBuf,
        /// Defaults to reserve-and-divide when the scenario has special classes.
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Monte-Carlo simulation of the scenario's layout.
    Simulate {
        /// Scenario file (TOML).
        scenario: PathBuf,
        /// Dedicated RAOs, as for `analyze`.
        #[arg(long)]
        plan: Option<String>,
        #[command(flatten)]
        sim: SimArgs,
        /// Also measure access delay (dedicated layouts only).
        #[arg(long)]
        delay: bool,
        /// Attempts before an unresolved request is censored.
        #[arg(long, default_value_t = 64)]
        max_attempts: u32,
        /// Write the per-class table to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Simulate every split of the RAOs between two classes.
    Sweep {
        /// Scenario file (TOML).
        scenario: PathBuf,
        /// Class whose RAO count is swept (default: first class in the file).
        #[arg(long)]
        class: Option<u32>,
        /// Inclusive range of swept RAO counts, `START:END`.
        #[arg(long, value_parser = parse_range)]
        range: (u64, u64),
        /// Spacing of swept RAO counts.
        #[arg(long, default_value_t = 1)]
        step: u64,
        #[command(flatten)]
        sim: SimArgs,
        /// Write one row per split to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Simulate several strategies on the same scenario and seed.
    Compare {
        /// Scenario file (TOML).
        scenario: PathBuf,
        /// Comma-separated; defaults to all that apply to the scenario.
        #[arg(long, value_enum, value_delimiter = ',')]
        strategies: Option<Vec<CompareStrategy>>,
        #[command(flatten)]
        sim: SimArgs,
        /// Write every strategy's class table to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected START:END, got `{s}`"))?;
    let parse = |v: &str| v.trim().parse::<u64>().map_err(|e| format!("`{v}`: {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let emit = Emit { json: cli.json };
    match cli.command {
        Command::Analyze { scenario, plan } => commands::analyze(scenario, plan, emit),
        Command::Optimize { scenario, method } => commands::optimize(scenario, method, emit),
        Command::Simulate { scenario, plan, sim, delay, max_attempts, csv } => {
            commands::simulate(scenario, SimulateOpts { plan, sim, delay, max_attempts, csv }, emit)
        }
        Command::Sweep { scenario, class, range, step, sim, csv } => {
            commands::sweep(scenario, SweepOpts { class, range, step, sim, csv }, emit)
        }
        Command::Compare { scenario, strategies, sim, csv } => commands::compare(scenario, strategies, sim, csv, emit),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("600:10200"), Ok((600, 10_200)));
        assert!(parse_range("600").is_err());
        assert!(parse_range("a:1").is_err());
    }
}
