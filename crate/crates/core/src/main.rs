fn main() {
    std::process::exit(gpdiag::cli::run(std::env::args_os()));
}
