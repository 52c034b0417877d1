use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(stabq::cli::run(std::env::args_os()))
}
