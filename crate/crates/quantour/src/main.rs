fn main() {
    std::process::exit(quantour::cli::run(std::env::args_os()));
}
