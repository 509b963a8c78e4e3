fn main() {
    std::process::exit(hypnet::cli::run(std::env::args_os()));
}
