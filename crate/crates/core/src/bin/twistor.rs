fn main() {
    std::process::exit(twistor::cli::run(std::env::args_os()));
}
