use std::process::ExitCode;

fn main() -> ExitCode {
    medaug::cli::run(std::env::args_os())
}
