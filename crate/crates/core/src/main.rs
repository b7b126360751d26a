fn main() {
    std::process::exit(latticelearn::cli::run());
}
