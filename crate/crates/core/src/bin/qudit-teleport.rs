fn main() -> std::process::ExitCode {
    qudit_teleport::cli::main()
}
