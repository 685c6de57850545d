fn main() -> std::process::ExitCode {
    std::process::ExitCode::from(corf::cli::main_with(std::env::args_os()))
}
