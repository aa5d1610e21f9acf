fn main() {
    std::process::exit(hoopsnet::cli::main_with_args(std::env::args_os()));
}
