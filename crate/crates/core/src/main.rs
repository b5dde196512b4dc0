fn main() {
    std::process::exit(transport_ratings::cli::main_with_args(std::env::args_os()));
}
