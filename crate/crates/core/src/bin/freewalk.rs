fn main() {
    std::process::exit(freewalk::cli::main_with_args(std::env::args_os()));
}
