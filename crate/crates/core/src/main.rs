fn main() {
    std::process::exit(burgers_rg::cli::main_with_args(std::env::args_os()));
}
