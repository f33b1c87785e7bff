use std::io;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use proactive::cli::{self, Cli, CliError, Command, Manifest};

fn run(cli: &Cli) -> anyhow::Result<()> {
    let prepared = cli::prepare(cli)?;
    for w in &prepared.warnings {
        eprintln!("{w}");
    }
    if let Command::Validate { file } = &cli.command {
        println!("{}: ok", file.display());
        return Ok(());
    }
    let rows = cli::execute(&prepared.experiment)?;
    match &prepared.out {
        Some(dir) => {
            let manifest = Manifest::new(prepared.experiment.clone());
            cli::write_outputs(dir, &rows, &manifest)
                .with_context(|| format!("writing outputs to {}", dir.display()))?;
        }
        None => cli::write_csv(&rows, io::stdout().lock()).context("writing CSV to stdout")?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(1, CliError::exit_code);
            ExitCode::from(code)
        }
    }
}
