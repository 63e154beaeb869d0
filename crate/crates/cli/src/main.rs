mod args;
mod commands;
mod error;
mod manifest;

use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

use args::{Cli, Command};
use commands::Session;
use error::CliError;
use manifest::RunManifest;

const USAGE: u8 = 1;

fn parameters<T: serde::Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| netrefine::Error::Parameter(format!("--threads: {e}")))?;
    }
    let params = match &cli.command {
        Command::Analyze(a) => parameters(a),
        Command::Refine(a) => parameters(a),
        Command::Metrics(a) => parameters(a),
        Command::Synth(a) => parameters(a),
        Command::Roadgap(a) => parameters(a),
    };
    let mut manifest = RunManifest::new(cli.command.name(), params, rayon::current_num_threads());
    let start = Instant::now();
    {
        let mut s = Session {
            manifest: &mut manifest,
        };
        match &cli.command {
            Command::Analyze(a) => commands::analyze(&mut s, a)?,
            Command::Refine(a) => commands::refine(&mut s, a)?,
            Command::Metrics(a) => commands::metrics(&mut s, a)?,
            Command::Synth(a) => commands::synth(&mut s, a)?,
            Command::Roadgap(a) => commands::roadgap(&mut s, a)?,
        }
    }
    manifest.finish(start.elapsed());
    if let Some(path) = &cli.manifest {
        std::fs::write(path, commands::to_json(&manifest)?).map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

/// Prints the parse error followed by the help of the subcommand it
/// concerns, so a usage error always shows the flag documentation.
fn usage_error(e: clap::Error) -> ExitCode {
    let _ = e.print();
    let mut cmd = Cli::command();
    let names: Vec<String> = cmd
        .get_subcommands()
        .map(|c| c.get_name().to_string())
        .collect();
    let sub = std::env::args().find(|a| names.contains(a));
    let help = match sub.as_deref().and_then(|n| cmd.find_subcommand_mut(n)) {
        Some(sc) => sc.render_help(),
        None => cmd.render_help(),
    };
    eprintln!("\n{help}");
    ExitCode::from(USAGE)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return usage_error(e),
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
