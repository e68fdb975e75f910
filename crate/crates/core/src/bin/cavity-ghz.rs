fn main() {
    std::process::exit(cavity_ghz::cli::main());
}
