fn main() {
    std::process::exit(riskkit::cli::main());
}
