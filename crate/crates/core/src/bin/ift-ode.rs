fn main() {
    std::process::exit(ift_ode_core::cli::main_with_args(std::env::args_os()));
}
