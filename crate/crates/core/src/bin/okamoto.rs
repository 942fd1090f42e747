fn main() {
    std::process::exit(okamoto::cli::main_with_args(std::env::args_os()));
}
