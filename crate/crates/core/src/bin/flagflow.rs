fn main() {
    std::process::exit(flagflow::cli::run(std::env::args_os()));
}
