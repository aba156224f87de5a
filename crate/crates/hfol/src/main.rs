fn main() {
    std::process::exit(hfol::frontend::cli::run_cli(std::env::args()));
}
