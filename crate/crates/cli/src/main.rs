fn main() {
    std::process::exit(pipg_cli::run(std::env::args_os()));
}
