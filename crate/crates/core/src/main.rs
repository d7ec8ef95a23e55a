use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(downlink_rl::cli::main(std::env::args_os()))
}
