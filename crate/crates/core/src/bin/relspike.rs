fn main() {
    std::process::exit(relspike::cli::run(std::env::args_os()));
}
