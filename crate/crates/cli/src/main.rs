fn main() {
    std::process::exit(randomizer_cli::run(std::env::args_os()));
}
