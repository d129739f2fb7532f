fn main() {
    std::process::exit(divprod::cli::run(std::env::args_os()));
}
