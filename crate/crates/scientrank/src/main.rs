use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(scientrank::cli::run(std::env::args()) as u8)
}
