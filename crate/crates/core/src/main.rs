fn main() {
    std::process::exit(ffvar::cli::main_with_args(std::env::args_os()));
}
