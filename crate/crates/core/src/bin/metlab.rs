fn main() {
    std::process::exit(metlab::harness::run(std::env::args_os()));
}
