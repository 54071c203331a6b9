fn main() {
    std::process::exit(qupass_cli::main_with(std::env::args_os()));
}
