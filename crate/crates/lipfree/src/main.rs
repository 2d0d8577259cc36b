fn main() {
    std::process::exit(lipfree::cli::main_with(std::env::args().collect()));
}
