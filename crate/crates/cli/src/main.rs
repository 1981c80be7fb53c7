mod args;
mod commands;
mod load;

use std::process::ExitCode;

use clap::Parser;
use treeconn::Error;

use crate::args::{Cli, Command};

/// Exit status for each error class: 2 for caller mistakes, 3 for bad or
/// unsuitable input, 4 for solver failures.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Argument(_) | Error::Size(_) => 2,
        Error::Data(_) | Error::Parse { .. } | Error::Domain(_) | Error::Infeasible { .. } | Error::Io(_) => 3,
        Error::Numerical(_) | Error::NonConvergence { .. } => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Synthesize(a) => commands::synthesize(a),
        Command::Certify(a) => commands::certify(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Bench(a) => commands::bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
