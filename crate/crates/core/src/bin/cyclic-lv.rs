fn main() {
    std::process::exit(cyclic_lv::cli::main_with_args(std::env::args_os()));
}
