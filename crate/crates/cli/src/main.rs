fn main() {
    std::process::exit(morphopoison_cli::run_cli(std::env::args_os()));
}
