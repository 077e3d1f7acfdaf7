fn main() -> std::process::ExitCode {
    fermi_klein::cli::main()
}
