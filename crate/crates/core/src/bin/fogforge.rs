fn main() {
    std::process::exit(fogforge::cli::run(std::env::args_os()));
}
