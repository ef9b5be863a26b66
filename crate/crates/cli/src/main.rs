use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};
use qrdkit_cli::{run, Cli, EXIT_USAGE};

fn main() -> ExitCode {
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let seed_given = matches.value_source("seed") == Some(clap::parser::ValueSource::CommandLine);
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    match run(&cli, seed_given) {
        Ok(manifest) => {
            if !cli.quiet {
                for o in &manifest.outputs {
                    eprintln!("wrote {o}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
