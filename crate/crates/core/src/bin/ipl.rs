fn main() {
    std::process::exit(invasion_lab::cli::main_with(std::env::args_os()));
}
