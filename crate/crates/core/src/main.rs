fn main() {
    std::process::exit(rsat_core::cli::run(std::env::args_os()));
}
