fn main() {
    std::process::exit(sympara_cli::main_with_args(std::env::args_os()));
}
