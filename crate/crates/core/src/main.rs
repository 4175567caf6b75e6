fn main() {
    std::process::exit(phimod::cli::main_with_args(std::env::args_os()));
}
