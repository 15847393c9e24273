use std::process::ExitCode;

use clap::Parser;
use quadint::{run, Cli};

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()) as u8)
}
