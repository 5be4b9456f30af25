use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phicaloric::runner::{self, ExitStatus, ExperimentConfig, ReportFormat, RunOptions};
use phicaloric::Error;

#[derive(Parser)]
#[command(name = "phicaloric", version, about = "Solve φ-caloric problems and check gradient estimates on the solutions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver for every configured run and write final snapshots.
    Solve(Common),
    /// Run selected checks (all when no --only is given).
    Check {
        #[command(flatten)]
        common: Common,
        /// Check label or name to run; repeatable.
        #[arg(long)]
        only: Vec<String>,
    },
    /// Run a whole suite; without --config the bundled acceptance suite.
    Suite(Common),
    /// Print the catalogue of initial-data presets.
    ListPresets,
    /// Print what a check verifies and reports.
    DescribeCheck { name: String },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<ReportFormat>,
    /// Solver cache directory (default: <out>/cache).
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    no_cache: bool,
}

fn load(path: Option<&PathBuf>, bundled: bool) -> Result<ExperimentConfig, Error> {
    match path {
        Some(p) => ExperimentConfig::from_path(p),
        None if bundled => runner::parse_config(runner::ACCEPTANCE_CONFIG),
        None => Err(Error::config("/", "--config is required")),
    }
}

fn execute(common: Common, only: Vec<String>, solve_only: bool, bundled: bool) -> ExitCode {
    let config = match load(common.config.as_ref(), bundled) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let options = RunOptions {
        out_dir: common.out,
        workers: common.workers,
        seed: common.seed,
        format: common.format,
        cache_dir: common.cache,
        no_cache: common.no_cache,
        only,
        solve_only,
    };
    match runner::run_experiment(&config, &options) {
        Ok(outcome) => {
            for run in outcome.summary.runs.iter().filter(|r| r.error.is_some()) {
                eprintln!("run {}: {}", run.id, run.error.as_deref().unwrap_or_default());
            }
            for c in &outcome.summary.checks {
                let stat = c.max_ratio.map(|v| format!("{v:.4e}")).unwrap_or_else(|| "-".into());
                println!("{:<5} {:<24} {:>12}  {}", if c.pass { "PASS" } else { "FAIL" }, c.check, stat, c.message);
            }
            println!("reports in {}", outcome.out_dir.display());
            ExitCode::from(outcome.status.code() as u8)
        }
        Err(e) => fail(e),
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(ExitStatus::of_error(&e).code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve(common) => execute(common, Vec::new(), true, false),
        Command::Check { common, only } => execute(common, only, false, false),
        Command::Suite(common) => execute(common, Vec::new(), false, true),
        Command::ListPresets => {
            print!("{}", runner::list_presets());
            ExitCode::SUCCESS
        }
        Command::DescribeCheck { name } => match runner::describe_check(&name) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
    }
}
