fn main() {
    std::process::exit(gonality::cli_io::run(std::env::args()));
}
