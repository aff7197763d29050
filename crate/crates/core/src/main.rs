fn main() {
    std::process::exit(zetakit::cli::run_command(std::env::args_os()));
}
