fn main() {
    std::process::exit(halo_cli::main_with_args(std::env::args_os()));
}
