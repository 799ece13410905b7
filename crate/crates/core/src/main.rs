fn main() {
    std::process::exit(steane_ft::cli::run(std::env::args_os()));
}
