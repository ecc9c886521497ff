fn main() {
    std::process::exit(tap_core::cli::run(std::env::args_os()));
}
