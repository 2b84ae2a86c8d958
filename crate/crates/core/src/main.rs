fn main() {
    std::process::exit(ershov_core::cli::main_with_args(std::env::args_os()));
}
