fn main() {
    std::process::exit(cmpc::cli::run(std::env::args_os()));
}
