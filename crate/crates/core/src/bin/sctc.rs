fn main() {
    std::process::exit(sctc::cli::main_with_args(std::env::args_os()));
}
