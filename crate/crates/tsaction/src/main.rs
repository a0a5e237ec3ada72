fn main() {
    std::process::exit(tsaction::cli::run(std::env::args_os()));
}
