use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(d2d::cli::main_with_args(std::env::args_os()))
}
