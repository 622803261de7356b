fn main() {
    std::process::exit(phasor_cli::run(std::env::args_os()));
}
