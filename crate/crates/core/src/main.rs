fn main() {
    std::process::exit(radprag::cli::run(std::env::args_os()));
}
