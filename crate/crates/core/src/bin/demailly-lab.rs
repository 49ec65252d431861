fn main() {
    std::process::exit(arakelov_demailly::cli::main_with_args(std::env::args_os()));
}
