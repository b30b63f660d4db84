fn main() {
    std::process::exit(kinamps::harness::cli_main(std::env::args().collect()));
}
