use std::process::ExitCode;

fn main() -> ExitCode {
    pickands::cli::main_with_args(std::env::args_os())
}
