use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(secnic::cli::run(std::env::args()) as u8)
}
