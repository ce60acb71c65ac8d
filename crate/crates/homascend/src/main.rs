fn main() {
    std::process::exit(homascend::cli_main());
}
