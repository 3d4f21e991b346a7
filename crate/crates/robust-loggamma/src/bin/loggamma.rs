fn main() {
    std::process::exit(robust_loggamma::cli::run(std::env::args_os()));
}
