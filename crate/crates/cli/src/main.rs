fn main() {
    std::process::exit(qru_cli::run(std::env::args_os()));
}
