fn main() {
    std::process::exit(ionqec::run(std::env::args_os()));
}
