fn main() {
    std::process::exit(qhje::cli::run(std::env::args_os()));
}
