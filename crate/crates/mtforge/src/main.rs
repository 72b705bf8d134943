fn main() {
    std::process::exit(mtforge::cli::main_with_args(std::env::args_os()));
}
