use clap::error::ErrorKind;
use clap::Parser;

use afc_keyforge::{run_experiment, Cli, RunError, EXIT_IO, EXIT_OK, EXIT_USAGE};

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let config = match cli.effective_config() {
        Ok(config) => config,
        Err(msg) => {
            eprintln!("afc-keyforge: {msg}");
            return EXIT_USAGE;
        }
    };
    match run_experiment(cli.preset, &config, &cli.out) {
        Ok(()) => EXIT_OK,
        Err(RunError::Config(msg)) => {
            eprintln!("afc-keyforge: {msg}");
            EXIT_USAGE
        }
        Err(e @ RunError::Io(_)) => {
            eprintln!("afc-keyforge: {e}");
            EXIT_IO
        }
    }
}
