use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spacelike_cli::runner::{exit_code, run_config_file, RunError, RunOptions};
use spacelike_cli::suite::{run_suite, write_suite, SuiteName, SuiteOptions};

/// Spacelike radial graphs in static spacetimes: scenarios and acceptance suite.
#[derive(Parser, Debug)]
#[command(name = "spacelike", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (overrides the scenario's `[output] dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for the randomised checks.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Multiplies every check tolerance.
    #[arg(long = "tol-scale", global = true, value_name = "X", default_value_t = 1.0)]
    tol_scale: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the tasks of a scenario file.
    Run { config: PathBuf },
    /// Run a bundled suite: `acceptance` or `quick`.
    Suite { name: String },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if !(cli.tol_scale > 0.0 && cli.tol_scale.is_finite()) {
        eprintln!("error: --tol-scale must be positive and finite");
        return ExitCode::from(1);
    }
    match cli.command {
        Command::Run { config } => {
            let opts = RunOptions { out: cli.out, seed: cli.seed, tol_scale: cli.tol_scale };
            match run_config_file(&config, &opts) {
                Ok(outcomes) => {
                    for o in &outcomes {
                        println!("{}", o.line());
                    }
                    ExitCode::from(exit_code(&outcomes) as u8)
                }
                Err(e @ RunError::Config(_)) => {
                    eprintln!("{}: {e}", config.display());
                    ExitCode::from(1)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Suite { name } => {
            let name: SuiteName = match name.parse() {
                Ok(n) => n,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let opts = SuiteOptions {
                seed: cli.seed.unwrap_or(SuiteOptions::default().seed),
                tol_scale: cli.tol_scale,
                quick: false,
            };
            let dir = cli.out.unwrap_or_else(|| PathBuf::from("out").join(name.as_str()));
            let outcomes = run_suite(name, &opts);
            for o in &outcomes {
                println!("{}", o.line());
            }
            if let Err(e) = write_suite(&outcomes, &dir) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            let passed = outcomes.iter().filter(|o| o.passed()).count();
            println!("{passed}/{} criteria passed; reports in {}", outcomes.len(), dir.display());
            if passed == outcomes.len() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
    }
}
