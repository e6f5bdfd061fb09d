fn main() {
    std::process::exit(zonalhop::cli::run(std::env::args_os()));
}
