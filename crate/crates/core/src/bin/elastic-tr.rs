fn main() -> std::process::ExitCode {
    elastic_tr::cli::main()
}
