//! Command-line front end for the `thermocav` solver.

pub mod args;
pub mod commands;
pub mod flux;
pub mod manifest;
pub mod plot;

use anyhow::Result;

use args::{Cli, Command};
use manifest::RunManifest;

pub fn run(cli: &Cli) -> Result<RunManifest> {
    if let Some(n) = cli.threads {
        thermocav::exec::set_worker_count(n);
    }
    match &cli.command {
        Command::Forward(a) => commands::forward(a),
        Command::Synthesize(a) => commands::synthesize(a),
        Command::Reconstruct(a) => commands::reconstruct(a),
        Command::Halfspace(a) => commands::halfspace(a),
        Command::Validate(a) => commands::validate(a),
    }
}
