fn main() {
    std::process::exit(freeconv::cli::main_with_args(std::env::args_os()));
}
