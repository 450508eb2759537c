fn main() {
    std::process::exit(amoo::cli::main_from_env());
}
