fn main() {
    std::process::exit(dismantle::cli::run(std::env::args_os()));
}
