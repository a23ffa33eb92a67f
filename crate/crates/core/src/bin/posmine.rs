fn main() {
    std::process::exit(posmine::cli::run(std::env::args_os()));
}
