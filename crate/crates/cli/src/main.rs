use std::process::ExitCode;

use clap::Parser;
use thermocav_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match thermocav_cli::run(&cli) {
        Ok(m) => {
            println!("{}", serde_json::to_string_pretty(&m.summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
