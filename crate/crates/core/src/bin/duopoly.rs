fn main() {
    std::process::exit(duopoly::cli::main_with_args(std::env::args_os()));
}
