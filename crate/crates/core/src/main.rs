fn main() {
    std::process::exit(polarity_gap::cli::run(std::env::args_os()));
}
