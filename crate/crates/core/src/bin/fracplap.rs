fn main() {
    std::process::exit(fracplap::cli::main(std::env::args_os()));
}
