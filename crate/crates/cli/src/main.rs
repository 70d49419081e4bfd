use std::process::ExitCode;

fn main() -> ExitCode {
    mixaug_cli::run(std::env::args_os())
}
