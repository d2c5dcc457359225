fn main() {
    std::process::exit(bhpdc::cli::run());
}
