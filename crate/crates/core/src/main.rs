fn main() {
    std::process::exit(nearstable::cli::run(std::env::args_os()));
}
