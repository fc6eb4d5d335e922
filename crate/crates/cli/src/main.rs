fn main() {
    std::process::exit(dionet_cli::run());
}
