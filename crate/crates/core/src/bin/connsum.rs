fn main() {
    std::process::exit(connsum::cli::main_with_args(std::env::args_os()));
}
