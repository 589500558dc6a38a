fn main() {
    std::process::exit(adqec::cli::run(std::env::args_os()));
}
