use std::process::ExitCode;

use arbound::commands::{cmd_coverage, cmd_select, cmd_simulate};
use arbound::config::{Cli, Command};
use arbound::{CliError, Result};
use clap::Parser;

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Select(config) => {
            let report = cmd_select(&config)?;
            let choice = &report.selection.per_order[report.selection.srm_choice - 1];
            println!(
                "n={} m={} mu={} srm_choice={} (bound {:.6}) aic_choice={}",
                report.data.n,
                report.plan.m,
                report.plan.mu,
                report.selection.srm_choice,
                choice.bound_total,
                report.selection.aic_choice
            );
        }
        Command::Simulate(config) => cmd_simulate(&config)?,
        Command::Coverage(args) => {
            let report = cmd_coverage(&args)?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
            println!("{json}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.workers {
        Some(0) => Err(CliError::Config("--workers must be at least 1".into())),
        Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
            Ok(pool) => pool.install(|| run(cli)),
            Err(e) => Err(CliError::Config(e.to_string())),
        },
        None => run(cli),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("arbound: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
