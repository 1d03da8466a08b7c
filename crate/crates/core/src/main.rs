fn main() {
    std::process::exit(ascm::cli::main_with(std::env::args_os()));
}
