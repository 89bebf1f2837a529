fn main() {
    std::process::exit(fairtax::cli::main_with_args(std::env::args_os()));
}
