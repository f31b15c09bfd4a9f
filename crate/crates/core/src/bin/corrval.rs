fn main() {
    std::process::exit(corrval::cli::main_with_args(std::env::args_os()));
}
