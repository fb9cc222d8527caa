fn main() {
    std::process::exit(isac_cli::run_cli(std::env::args_os()));
}
