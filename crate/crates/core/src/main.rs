use std::process::ExitCode;

fn main() -> ExitCode {
    let code = crowd_sweep::cli::run(std::env::args_os());
    ExitCode::from(code)
}
