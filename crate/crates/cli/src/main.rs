fn main() {
    std::process::exit(qrecover_cli::run(std::env::args_os()));
}
