fn main() {
    std::process::exit(wedgelab::cli::run(std::env::args_os()));
}
