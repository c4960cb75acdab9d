fn main() {
    std::process::exit(housealloc::cli::main_with_args(std::env::args_os()));
}
