fn main() -> std::process::ExitCode {
    rigid_neumann::harness::cli::main()
}
