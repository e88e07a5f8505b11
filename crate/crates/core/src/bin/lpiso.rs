fn main() {
    std::process::exit(lpiso::cli::main_with_args(std::env::args_os()));
}
