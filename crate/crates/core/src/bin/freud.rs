fn main() {
    std::process::exit(freud_core::cli::main_with_args(std::env::args_os()));
}
