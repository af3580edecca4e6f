fn main() {
    std::process::exit(partsent_cli::run(std::env::args_os()));
}
