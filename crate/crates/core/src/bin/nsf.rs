fn main() {
    std::process::exit(qudit_nsf::cli::run(std::env::args_os()));
}
