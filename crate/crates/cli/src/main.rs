use clap::Parser;
use std::process::ExitCode;

use mflab_cli::{run, Args, CliError};

fn main() -> ExitCode {
    let args = Args::parse();
    let result = run(&args).and_then(|text| match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mflab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
