fn main() {
    std::process::exit(fcc::main_with(std::env::args_os()));
}
