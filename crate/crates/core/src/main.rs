fn main() {
    std::process::exit(nlhet::cli::run());
}
