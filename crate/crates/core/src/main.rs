fn main() {
    std::process::exit(treeid::cli::main_with(std::env::args_os()));
}
