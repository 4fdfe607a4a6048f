fn main() {
    std::process::exit(shearscope::cli::main_with_args(std::env::args_os()));
}
