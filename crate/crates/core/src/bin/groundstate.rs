fn main() {
    std::process::exit(groundstate::cli::main_with_args(std::env::args_os()));
}
