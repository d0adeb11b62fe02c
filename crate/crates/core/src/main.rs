fn main() {
    std::process::exit(semiquant::cli::run_cli(std::env::args_os()));
}
