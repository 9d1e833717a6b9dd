fn main() {
    std::process::exit(pooleq_cli::run(std::env::args_os()));
}
