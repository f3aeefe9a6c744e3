use std::process::ExitCode;

use clap::Parser;
use loopscan_cli::{run, Cli, Status};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let status = match run(cli) {
        Ok(status) => status,
        Err(err) => {
            eprintln!("error: {err:#}");
            Status::Error
        }
    };
    ExitCode::from(status.code() as u8)
}
