use std::process::ExitCode;

fn main() -> ExitCode {
    annulus_cli::main_from(std::env::args_os())
}
