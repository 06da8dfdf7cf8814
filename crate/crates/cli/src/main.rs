fn main() {
    std::process::exit(ultrawelch_cli::run(std::env::args_os()));
}
