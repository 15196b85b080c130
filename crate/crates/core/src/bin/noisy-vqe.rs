fn main() {
    std::process::exit(noisy_vqe::explab::cli_run(std::env::args_os()));
}
