fn main() {
    std::process::exit(ptmoments::cli::main_with_args(std::env::args_os()));
}
