fn main() {
    std::process::exit(detlab::cli::main_entry());
}
