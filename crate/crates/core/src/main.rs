fn main() {
    std::process::exit(noma_secrecy::cli::run());
}
