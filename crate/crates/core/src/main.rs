fn main() {
    std::process::exit(vlanesim::cli::run_cli(std::env::args_os()));
}
