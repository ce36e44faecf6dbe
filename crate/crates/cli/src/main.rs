mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.common.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs as usize).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let common = &cli.common;
    let result = match &cli.command {
        Command::Tableau(a) => commands::tableau(common, a),
        Command::Stability(a) => commands::stability(common, a),
        Command::Integrate(a) => commands::integrate(common, a),
        Command::Fput(c) => commands::fput(common, c),
        Command::Converge(a) => commands::converge(common, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
