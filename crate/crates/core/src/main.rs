fn main() {
    std::process::exit(hidetify::cli::run(std::env::args_os()));
}
