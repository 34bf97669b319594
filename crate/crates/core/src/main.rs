fn main() {
    std::process::exit(triad_bell::cli::run_cli(std::env::args_os()));
}
