use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qformal::scenario::{emit_schema, run_scenario_file, RunOptions};

#[derive(Parser)]
#[command(
    name = "qformal",
    version,
    about = "Run quantum-formalism verification scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its report.
    Run {
        file: PathBuf,
        /// Report destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides one tolerance, e.g. `--tol-override stochastic=1e-9`. Repeatable.
        #[arg(long = "tol-override", value_name = "KEY=VAL")]
        tol_override: Vec<String>,
    },
    /// Print the scenario schema.
    Schema,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Schema => {
            print!("{}", emit_schema());
            ExitCode::SUCCESS
        }
        Command::Run {
            file,
            out,
            seed,
            tol_override,
        } => {
            let opts = RunOptions {
                seed,
                tol_overrides: tol_override,
            };
            let report = run_scenario_file(&file, &opts);
            if let Some(e) = &report.error {
                eprintln!("qformal: {e}");
            }
            let text = report.to_json();
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, text) {
                        eprintln!("qformal: cannot write {}: {e}", path.display());
                        return ExitCode::from(4);
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::from(report.exit_code() as u8)
        }
    }
}
