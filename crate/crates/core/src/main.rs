use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use posygp::cli::{solve_command, Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Solve(args) => solve_command(&args),
    };
    // Broken pipes are not worth a panic.
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.exit_code as u8)
}
