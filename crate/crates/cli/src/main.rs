use std::process::ExitCode;

fn main() -> ExitCode {
    let code = keyrate_cli::dispatch(std::env::args_os());
    ExitCode::from(code as u8)
}
