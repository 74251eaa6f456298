use std::path::PathBuf;
use std::process::ExitCode;

use angleform::commands::{self, Fixture};
use angleform::scenario_file::Overrides;
use angleform::CliError;
use clap::{Parser, Subcommand};

/// Angle-constrained formation control: validate, run and reproduce
/// scenarios.
#[derive(Debug, Parser)]
#[command(name = "angleform", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a scenario file and report every problem found.
    Validate { file: PathBuf },
    /// Simulate a scenario and write trajectory, metrics and plots.
    Run {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the integration step [s].
        #[arg(long)]
        dt: Option<f64>,
        /// Override the simulated duration [s].
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Run a bundled scenario and check it against the acceptance criteria.
    Reproduce {
        #[arg(value_enum, required_unless_present = "all")]
        which: Option<Fixture>,
        #[arg(long)]
        out: PathBuf,
        /// Run every bundled scenario, each into its own subdirectory.
        #[arg(long, conflicts_with = "which")]
        all: bool,
    },
}

fn report(result: Result<(), CliError>) -> ExitCode {
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ANGLEFORM_LOG", "warn")).init();
    let cli = Cli::parse();
    report(match cli.command {
        Command::Validate { file } => {
            commands::validate(&file).map(|_| println!("{}: ok", file.display()))
        }
        Command::Run {
            file,
            out,
            dt,
            duration,
        } => commands::run(&file, &out, Overrides { dt, duration }).map(|m| {
            if let Some(e) = m.terminal.angle_error_rad {
                println!("terminal angle error {e:.3e} rad");
            }
            println!("wrote {}", out.display());
        }),
        Command::Reproduce { which, out, all } => {
            let runs = if all {
                commands::reproduce_all(&out)
            } else {
                let f = which.expect("clap requires a fixture without --all");
                vec![commands::reproduce(f, &out)]
            };
            let mut failed = Vec::new();
            let mut first_err = None;
            for r in runs {
                match r {
                    Ok(r) => {
                        println!("{}", r.summary());
                        failed.extend(
                            r.outcomes
                                .iter()
                                .filter(|o| !o.passed)
                                .map(|o| o.id.to_string()),
                        );
                    }
                    Err(e) => {
                        first_err.get_or_insert(e);
                    }
                }
            }
            match (first_err, failed.is_empty()) {
                (Some(e), _) => Err(e),
                (None, true) => Ok(()),
                (None, false) => Err(CliError::ChecksFailed(failed)),
            }
        }
    })
}
