fn main() -> std::process::ExitCode {
    blindcount::cli::main_with_args(std::env::args_os())
}
