mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use output::{CliError, Sink};

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.common.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // fails only if a pool already exists, in which case it is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let common = &cli.common;
    let sink = Sink::new(common);
    match &cli.command {
        Command::Ball(a) => commands::ball(a, common, &sink),
        Command::Growth(a) => commands::growth(a, common, &sink),
        Command::Entropy(a) => commands::entropy(a, common, &sink),
        Command::Delta(a) => commands::delta(a, common, &sink),
        Command::Systole(a) => commands::systole(a, common, &sink),
        Command::Net(a) => commands::net(a, common, &sink),
        Command::Cover(a) => commands::cover(a, common, &sink),
        Command::Constant(a) => commands::constant(a, common, &sink),
        Command::Bound(a) => commands::bound(a, common, &sink),
        Command::Verify(a) => commands::verify(a, common, &sink),
        Command::Pipeline(a) => commands::pipeline(a, common, &sink),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
