fn main() {
    std::process::exit(crowpair::cli::main_with_args(std::env::args_os()));
}
