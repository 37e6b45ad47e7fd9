fn main() {
    std::process::exit(redver::cli::main_from(std::env::args_os()));
}
