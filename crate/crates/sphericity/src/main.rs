fn main() {
    std::process::exit(sphericity::cli::run());
}
