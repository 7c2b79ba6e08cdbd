fn main() {
    std::process::exit(critnls::cli::run(std::env::args_os()));
}
