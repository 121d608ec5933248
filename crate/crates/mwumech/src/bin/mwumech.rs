fn main() {
    std::process::exit(mwumech::cli::run(std::env::args_os()));
}
