fn main() {
    std::process::exit(cascade_ge::cli::run(std::env::args_os()));
}
