use std::process::ExitCode;

fn main() -> ExitCode {
    ping_gnn::cli::main_with_args(std::env::args_os())
}
