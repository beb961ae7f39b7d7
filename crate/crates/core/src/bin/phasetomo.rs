fn main() {
    std::process::exit(phasetomo::cli::run(std::env::args_os()));
}
