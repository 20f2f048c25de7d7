fn main() {
    std::process::exit(anharmonic::cli::main_entry());
}
