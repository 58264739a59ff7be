fn main() {
    std::process::exit(noisestab::cli::run(std::env::args_os()));
}
